"""Elementary moves of a walk and the ordinal each one contributes."""
from dataclasses import dataclass
from typing import Union

from tgalaxy.ordinal.arith import ExtRank, Ordinal, ONE, ZERO, omega_pow, OMEGA


@dataclass(frozen=True)
class BranchStep:
    branch: str

    def __str__(self):
        return f"-[{self.branch}]-"


@dataclass(frozen=True)
class RaySegment:
    """`end - start` consecutive branches of one ray instance."""

    ray: str
    start: int
    end: int

    def __str__(self):
        return f"-[{self.ray}@{self.start}..{self.end}]-"


@dataclass(frozen=True)
class TipTraversal:
    rank: ExtRank
    source: str = ""

    def __str__(self):
        where = f" {self.source}" if self.source else ""
        return f"-<tip {self.rank}{where}>-"


Step = Union[BranchStep, RaySegment, TipTraversal]


def tip_weight(rank: ExtRank) -> Ordinal:
    """w^(a+1) for an a-tip, w^w for a warrow-tip, 0 for a branch extremity."""
    if rank.is_minus_one:
        return ZERO
    if rank.is_arrow:
        return omega_pow(OMEGA)
    if rank.is_omega:
        raise ValueError("there are no omega-tips below rank omega+1")
    return omega_pow(rank.succ())


def step_weight(step: Step) -> Ordinal:
    if isinstance(step, BranchStep):
        return ONE
    if isinstance(step, RaySegment):
        return Ordinal.finite(abs(step.end - step.start))
    return tip_weight(step.rank)
