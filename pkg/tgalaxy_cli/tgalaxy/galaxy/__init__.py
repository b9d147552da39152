from tgalaxy.galaxy.checks import (
    WitnessChain,
    containment_check,
    dichotomy_check,
    escape_check,
    hyperbranch_check,
    sample_containment_presentations,
    section_containment,
    single_galaxy_propagation,
    witness_chain,
)
from tgalaxy.galaxy.engine import (
    GalaxyClass,
    GalaxyPartition,
    OrderReport,
    classify,
    closeness,
    closer_than,
    order_partition,
    refinement_check,
)
