from tgalaxy.hyper.context import EnlargementContext, Hypernode
from tgalaxy.hyper.engine import (
    equivalent,
    hyperdistance,
    is_maximal_hypernode,
    limitedly_distant,
    triangle_check,
)
from tgalaxy.hyper.parser import parse_presentation
from tgalaxy.hyper.presentations import (
    ArmIndexed,
    FinitePatch,
    IndexMap,
    Interleave,
    RayIndexed,
    Standard,
)
from tgalaxy.hyper.verdicts import (
    No,
    ResidueClass,
    UltrafilterDependent,
    Yes,
    merge_residues,
)
