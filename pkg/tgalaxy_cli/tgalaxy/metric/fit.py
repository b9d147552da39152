"""Closed-form distances from a fixed node to an arm-indexed node sequence."""
from dataclasses import dataclass

from tgalaxy.core.config import settings
from tgalaxy.core.errors import UnknownNode
from tgalaxy.ordinal.poly import OrdinalPoly, fit_ordinal_poly
from tgalaxy.wgraph.presentation import WGraphPresentation
from tgalaxy.wgraph.refs import WNodeRef, split_local
from tgalaxy.metric.search import wdistance


@dataclass(frozen=True)
class ArmPattern:
    """Node `local` of arm copy a*n+b."""

    arm: str
    a: int
    b: int
    local: str

    def node(self, n: int) -> WNodeRef:
        name, pos = split_local(self.local)
        return WNodeRef(self.arm, self.a * n + self.b, name, pos)

    def __str__(self):
        return f"arm({self.arm},{self.a},{self.b},{self.local})"


def arm_distance_poly(g: WGraphPresentation, base, pattern: ArmPattern, *, start: int = None) -> OrdinalPoly:
    """Fit n -> wdistance(base, pattern(n)) on three indices and verify on the next two."""
    base = g.resolve(base)
    if pattern.a < 0 or pattern.b < 0:
        raise ValueError(f"{pattern} needs a, b >= 0")
    g.arm(pattern.arm)
    if g.rank_of(pattern.node(0)) is None:
        raise UnknownNode(str(pattern.node(0)))
    first = settings.FIT_START if start is None else start
    return fit_ordinal_poly(lambda n: wdistance(g, base, pattern.node(n)), first)
