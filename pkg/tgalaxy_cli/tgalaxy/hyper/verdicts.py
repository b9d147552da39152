"""
Verdicts about index sets under every free ultrafilter at once.

A property that holds on every residue class of some modulus holds cofinitely
(Yes); one that fails on every class fails cofinitely (No). Anything else
depends on which ultrafilter is chosen and is reported per residue class.
"""
from dataclasses import dataclass
from typing import Iterable, List, Tuple, Union


@dataclass(frozen=True, order=True)
class ResidueClass:
    modulus: int = 1
    residue: int = 0

    def __post_init__(self):
        if self.modulus < 1 or not 0 <= self.residue < self.modulus:
            raise ValueError(f"bad residue class {self.residue} mod {self.modulus}")

    def index(self, k: int) -> int:
        return self.modulus * k + self.residue

    def __str__(self):
        if self.modulus == 1:
            return "all n"
        return f"n={self.residue} mod {self.modulus}"

    def to_json(self):
        return {"modulus": self.modulus, "residue": self.residue}


ALL_N = ResidueClass(1, 0)


@dataclass(frozen=True)
class Yes:
    mu: int = 0

    def __str__(self):
        return f"Yes(mu={self.mu})"

    def to_json(self):
        return {"verdict": "Yes", "mu": self.mu}


@dataclass(frozen=True)
class No:
    def __str__(self):
        return "No"

    def to_json(self):
        return {"verdict": "No"}


@dataclass(frozen=True)
class UltrafilterDependent:
    per_residue: Tuple[Tuple[ResidueClass, Union[Yes, No]], ...]

    def __str__(self):
        parts = ", ".join(f"{rc}: {v}" for rc, v in self.per_residue)
        return f"UltrafilterDependent[{parts}]"

    def to_json(self):
        return {
            "verdict": "UltrafilterDependent",
            "per_residue": [dict(rc.to_json(), **v.to_json()) for rc, v in self.per_residue],
        }


LimitVerdict = Union[Yes, No, UltrafilterDependent]


def _divisors(m: int) -> List[int]:
    return [d for d in range(1, m + 1) if m % d == 0]


def merge_residues(items: Iterable[Tuple[ResidueClass, Union[Yes, No]]]) -> LimitVerdict:
    """Combine per-residue verdicts over one common modulus into a LimitVerdict."""
    items = sorted(items)
    if not items:
        raise ValueError("no residue verdicts to merge")
    modulus = items[0][0].modulus
    if any(rc.modulus != modulus for rc, _ in items) or len(items) != modulus:
        raise ValueError("residue verdicts must cover one modulus exactly once")
    if all(isinstance(v, Yes) for _, v in items):
        return Yes(max(v.mu for _, v in items))
    if all(isinstance(v, No) for _, v in items):
        return No()
    by_residue = {rc.residue: v for rc, v in items}
    for d in _divisors(modulus):
        groups = {}
        for r, v in by_residue.items():
            groups.setdefault(r % d, []).append(v)
        if all(len({type(v) for v in vs}) == 1 for vs in groups.values()):
            merged = []
            for r in range(d):
                vs = groups[r]
                v = Yes(max(x.mu for x in vs)) if isinstance(vs[0], Yes) else No()
                merged.append((ResidueClass(d, r), v))
            return UltrafilterDependent(tuple(merged))
    raise AssertionError("the full modulus always separates residues")


def refine(modulus: int, residue: int, target: int):
    """Residues mod `target` (a multiple of `modulus`) lying in the class `residue` mod `modulus`."""
    if target % modulus:
        raise ValueError(f"{target} is not a multiple of {modulus}")
    return [r for r in range(target) if r % modulus == residue]
