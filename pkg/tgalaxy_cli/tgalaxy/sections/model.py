"""
Finite descriptions of (possibly infinite) branch sets.

A section is a set of fixed branch keys plus, per arm, a tail: the same cell
branches in every copy from `start` on. A family stands for one section per
arm copy, all translates of one template.
"""
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Optional, Tuple, Union

from tgalaxy.ordinal.arith import ExtRank
from tgalaxy.wgraph.refs import BranchKey, parse_branch_id


def _key(branch: Union[str, BranchKey]) -> BranchKey:
    return parse_branch_id(branch) if isinstance(branch, str) else branch


@dataclass(frozen=True)
class ArmTail:
    arm: str
    start: int
    locals: FrozenSet[str]

    def contains(self, k: BranchKey) -> bool:
        return k.scope == self.arm and k.block is not None and k.block >= self.start and k.local in self.locals

    def keys_at(self, copy: int) -> Iterable[str]:
        for local in sorted(self.locals):
            yield f"{self.arm}[{copy}].{local}"


@dataclass(frozen=True)
class SectionFamily:
    rank: ExtRank
    arm: str
    start: int
    template: FrozenSet[Tuple[int, str]]

    @property
    def id(self) -> str:
        return min(f"{self.arm}[*].{local}" for _, local in self.template)

    def index_of(self, branch) -> Optional[int]:
        """Copy j of the instance holding `branch`, None when no instance does."""
        k = _key(branch)
        if k.scope != self.arm or k.block is None:
            return None
        for offset, local in self.template:
            if local == k.local and k.block - offset >= self.start:
                return k.block - offset
        return None

    def instance(self, j: int) -> "SectionRef":
        if j < self.start:
            raise ValueError(f"family {self.id} starts at copy {self.start}")
        keys = frozenset(f"{self.arm}[{j + off}].{local}" for off, local in self.template)
        return SectionRef(self.rank, min(keys), keys, (), self, j)


@dataclass(frozen=True)
class SectionRef:
    rank: ExtRank
    id: str
    fixed: FrozenSet[str] = frozenset()
    tails: Tuple[ArmTail, ...] = ()
    family: Optional[SectionFamily] = field(default=None, compare=False)
    instance_index: Optional[int] = None

    @classmethod
    def of_family(cls, fam: SectionFamily) -> "SectionRef":
        return cls(fam.rank, fam.id, frozenset(), (), fam, None)

    @property
    def is_family(self) -> bool:
        """True for the symbolic entry standing for every instance."""
        return self.family is not None and self.instance_index is None

    @property
    def is_infinite(self) -> bool:
        return bool(self.tails) or self.is_family

    def contains(self, branch) -> bool:
        k = _key(branch)
        if self.is_family:
            return self.family.index_of(k) is not None
        if str(k) in self.fixed:
            return True
        return any(t.contains(k) for t in self.tails)

    def sample_keys(self, extra: int = 3) -> FrozenSet[str]:
        """Fixed keys plus tail keys for `extra` + 1 copies from each tail start."""
        keys = set(self.fixed)
        for t in self.tails:
            for c in range(t.start, t.start + extra + 1):
                keys.update(t.keys_at(c))
        if self.is_family:
            keys.update(self.family.instance(self.family.start).fixed)
        return frozenset(keys)

    def describe(self) -> str:
        if self.is_family:
            return f"one section per copy j >= {self.family.start} of arm {self.family.arm}"
        parts = []
        if self.fixed:
            parts.append(f"{len(self.fixed)} fixed branch key(s)")
        for t in self.tails:
            parts.append(f"arm {t.arm} copies >= {t.start}: " + ", ".join(sorted(t.locals)))
        return "; ".join(parts) or "no branches"

    def to_json(self):
        out = {"rank": self.rank.to_json(), "id": self.id, "fixed": sorted(self.fixed),
               "tails": [{"arm": t.arm, "start": t.start, "locals": sorted(t.locals)} for t in self.tails]}
        if self.family is not None:
            out["family"] = {"id": self.family.id, "arm": self.family.arm, "start": self.family.start,
                             "template": sorted([off, local] for off, local in self.family.template)}
            if self.instance_index is not None:
                out["instance"] = self.instance_index
        return out

    def __str__(self):
        return self.id


def nested(inner: SectionRef, outer: SectionRef) -> bool:
    """Branch-set inclusion, checked on the finite sample of the inner section."""
    return all(outer.contains(k) for k in inner.sample_keys())
