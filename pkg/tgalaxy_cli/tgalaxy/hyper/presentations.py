"""
Finitely presented wnode sequences n -> x_n.

Every form knows the node at index n, the modulus after which its index
arithmetic is polynomial on each residue class (`period`), and from which
position k inside the class n = M*k + r it is regular (`stable_from`).
"""
from dataclasses import dataclass, field
from math import gcd
from typing import Tuple, Union

from tgalaxy.ordinal.poly import poly_eval, poly_nonnegative_from, poly_str, poly_sub, poly_trim
from tgalaxy.wgraph.refs import WNodeRef, split_local


def lcm(*values: int) -> int:
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


def _first_k(M: int, r: int, n0: int) -> int:
    """Least k with M*k + r >= n0."""
    return max(0, -(-(n0 - r) // M))


@dataclass(frozen=True)
class IndexMap:
    """n -> max(floor, p(n) // divisor) for an integer polynomial p (constant term first)."""

    coeffs: Tuple[int, ...]
    divisor: int = 1
    floor: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", poly_trim(self.coeffs))
        if self.divisor < 1:
            raise ValueError("index divisor must be >= 1")
        if self.floor < 0:
            raise ValueError("index floor must be >= 0")
        if self.coeffs and poly_nonnegative_from(self.coeffs) is None:
            raise ValueError(f"index map {poly_str(self.coeffs)} is eventually negative")

    @classmethod
    def affine(cls, a: int, b: int, divisor: int = 1, floor: int = 0) -> "IndexMap":
        return cls((b, a), divisor, floor)

    def __call__(self, n: int) -> int:
        return max(self.floor, poly_eval(self.coeffs, n) // self.divisor)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_affine(self) -> bool:
        return self.degree <= 1

    @property
    def slope(self) -> int:
        return self.coeffs[1] if len(self.coeffs) > 1 else 0

    @property
    def offset(self) -> int:
        return self.coeffs[0] if self.coeffs else 0

    def period(self) -> int:
        if self.divisor == 1 or self.degree < 1:
            return 1
        if self.is_affine:
            return self.divisor // gcd(self.slope, self.divisor)
        return self.divisor

    def stable_index(self) -> int:
        """Least n from which the floor no longer binds."""
        shifted = poly_sub(self.coeffs, (self.floor * self.divisor,))
        if not shifted:
            return 0
        start = poly_nonnegative_from(shifted)
        return 0 if start is None else start

    def format_coeffs(self) -> str:
        if self.is_affine:
            return f"{self.slope},{self.offset}"
        return "[" + ",".join(str(c) for c in self.coeffs) + "]"

    def format_tail(self) -> str:
        if self.divisor != 1 or self.floor != 0:
            return f",{self.divisor},{self.floor}"
        return ""

    def format(self) -> str:
        return self.format_coeffs() + self.format_tail()

    def __str__(self):
        text = poly_str(self.coeffs) if self.coeffs else "0"
        if self.divisor != 1:
            text = f"floor(({text})/{self.divisor})"
        if self.floor:
            text = f"max({self.floor},{text})"
        return text


@dataclass(frozen=True)
class Standard:
    node: WNodeRef

    def node_at(self, n: int) -> WNodeRef:
        return self.node

    def period(self) -> int:
        return 1

    def stable_from(self, M: int, r: int) -> int:
        return 0

    def format(self) -> str:
        return f"std({self.node})"


@dataclass(frozen=True)
class ArmIndexed:
    arm: str
    index: IndexMap
    local: str

    def node_at(self, n: int) -> WNodeRef:
        name, pos = split_local(self.local)
        return WNodeRef(self.arm, self.index(n), name, pos)

    def period(self) -> int:
        return self.index.period()

    def stable_from(self, M: int, r: int) -> int:
        return _first_k(M, r, self.index.stable_index())

    def format(self) -> str:
        return f"arm({self.arm},{self.index.format_coeffs()},{self.local}{self.index.format_tail()})"


@dataclass(frozen=True)
class RayIndexed:
    """Positions index(n) along one ray instance."""

    scope: str
    block: Union[int, None]
    ray: str
    index: IndexMap

    def node_at(self, n: int) -> WNodeRef:
        return WNodeRef(self.scope, self.block, self.ray, self.index(n))

    def period(self) -> int:
        return self.index.period()

    def stable_from(self, M: int, r: int) -> int:
        return _first_k(M, r, self.index.stable_index())

    def format(self) -> str:
        return f"ray({WNodeRef(self.scope, self.block).prefix}{self.ray},{self.index.format()})"


@dataclass(frozen=True)
class Interleave:
    """x_n taken from branch n mod m."""

    branches: Tuple["Presentation", ...]

    def __post_init__(self):
        if len(self.branches) < 2:
            raise ValueError("interleave needs a modulus >= 2")

    @property
    def modulus(self) -> int:
        return len(self.branches)

    def node_at(self, n: int) -> WNodeRef:
        return self.branches[n % self.modulus].node_at(n)

    def period(self) -> int:
        return lcm(self.modulus, *(b.period() for b in self.branches))

    def stable_from(self, M: int, r: int) -> int:
        return self.branches[r % self.modulus].stable_from(M, r)

    def format(self) -> str:
        return f"interleave({self.modulus}," + ",".join(b.format() for b in self.branches) + ")"


@dataclass(frozen=True)
class FinitePatch:
    base: "Presentation"
    overrides: Tuple[Tuple[int, WNodeRef], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "overrides", tuple(sorted(dict(self.overrides).items())))
        if any(n < 0 for n, _ in self.overrides):
            raise ValueError("patch indices are natural numbers")

    def node_at(self, n: int) -> WNodeRef:
        return dict(self.overrides).get(n) or self.base.node_at(n)

    def period(self) -> int:
        return self.base.period()

    def stable_from(self, M: int, r: int) -> int:
        last = max((n for n, _ in self.overrides), default=-1)
        return max(self.base.stable_from(M, r), _first_k(M, r, last + 1))

    def format(self) -> str:
        body = ",".join(f"{n}:{node}" for n, node in self.overrides)
        return f"patch({self.base.format()},{{{body}}})"


Presentation = Union[Standard, ArmIndexed, RayIndexed, Interleave, FinitePatch]


def is_standard(p) -> bool:
    return isinstance(p, Standard)


def stable_start(M: int, r: int, *presentations) -> int:
    return max([p.stable_from(M, r) for p in presentations] + [0])
