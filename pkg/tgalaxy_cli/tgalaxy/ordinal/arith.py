"""
Cantor-normal-form ordinals below w^(w+1) and the extended ranks that index them.

Ranks run 0 < 1 < 2 < ... < warrow < omega; a (-1) rank exists only for branch
extremity tips. Ordinals are finite descending lists of (exponent, coefficient)
terms where the exponent is a finite rank or omega.
"""
from dataclasses import dataclass
from enum import Enum
from functools import total_ordering
from typing import Iterable, Tuple, Union

from tgalaxy.core.errors import (
    DominanceError,
    EmptySetError,
    OmegaPowError,
    OrdinalSyntaxError,
)

_MINUS_ONE_TIER = -1
_FINITE_TIER = 0
_ARROW_TIER = 1
_OMEGA_TIER = 2


@dataclass(frozen=True, order=True)
class ExtRank:
    tier: int
    k: int = 0

    def __post_init__(self):
        if self.tier == _FINITE_TIER and self.k < 0:
            raise ValueError(f"finite rank must be >= 0, got {self.k}")

    @classmethod
    def fin(cls, k: int) -> "ExtRank":
        return cls(_FINITE_TIER, k)

    @property
    def is_finite(self) -> bool:
        return self.tier == _FINITE_TIER

    @property
    def is_arrow(self) -> bool:
        return self.tier == _ARROW_TIER

    @property
    def is_omega(self) -> bool:
        return self.tier == _OMEGA_TIER

    @property
    def is_minus_one(self) -> bool:
        return self.tier == _MINUS_ONE_TIER

    def pred(self) -> "ExtRank":
        """rho - 1, with omega - 1 read as warrow."""
        if self.is_finite:
            return ExtRank.fin(self.k - 1) if self.k > 0 else MINUS_ONE
        if self.is_omega:
            return ARROW_OMEGA
        raise ValueError(f"rank {self} has no predecessor")

    def succ(self) -> "ExtRank":
        if self.is_minus_one:
            return ExtRank.fin(0)
        if self.is_finite:
            return ExtRank.fin(self.k + 1)
        raise ValueError(f"rank {self} has no successor below omega+1")

    def to_json(self) -> Union[int, str]:
        if self.is_finite:
            return self.k
        if self.is_minus_one:
            return -1
        return "warrow" if self.is_arrow else "omega"

    def __str__(self):
        return str(self.to_json())


MINUS_ONE = ExtRank(_MINUS_ONE_TIER)
ARROW_OMEGA = ExtRank(_ARROW_TIER)
OMEGA = ExtRank(_OMEGA_TIER)


def parse_rank(value, *, allow_minus_one: bool = False) -> ExtRank:
    if isinstance(value, ExtRank):
        rank = value
    elif isinstance(value, bool):
        raise ValueError(f"not a rank: {value!r}")
    elif isinstance(value, int):
        rank = MINUS_ONE if value == -1 else ExtRank.fin(value)
    elif isinstance(value, str):
        text = value.strip().lower()
        if text in ("warrow", "arrow", "w->", "ω⃗"):
            rank = ARROW_OMEGA
        elif text in ("omega", "w", "ω"):
            rank = OMEGA
        elif text.lstrip("-").isdigit():
            return parse_rank(int(text), allow_minus_one=allow_minus_one)
        else:
            raise ValueError(f"not a rank: {value!r}")
    else:
        raise ValueError(f"not a rank: {value!r}")
    if rank.is_minus_one and not allow_minus_one:
        raise ValueError("rank -1 is only valid for tips")
    return rank


class Cmp(Enum):
    LT = -1
    EQ = 0
    GT = 1


Term = Tuple[ExtRank, int]


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    terms: Tuple[Term, ...] = ()

    def __post_init__(self):
        previous = None
        for exponent, coefficient in self.terms:
            if exponent.is_arrow or exponent.is_minus_one:
                raise ValueError(f"invalid ordinal exponent {exponent}")
            if coefficient <= 0:
                raise ValueError("ordinal coefficients must be positive")
            if previous is not None and not exponent < previous:
                raise ValueError("ordinal exponents must be strictly descending")
            previous = exponent

    @classmethod
    def from_mapping(cls, coefficients) -> "Ordinal":
        items = sorted(((e, c) for e, c in coefficients.items() if c), reverse=True)
        return cls(tuple(items))

    @classmethod
    def finite(cls, n: int) -> "Ordinal":
        if n < 0:
            raise ValueError("ordinals are nonnegative")
        return cls(((ExtRank.fin(0), n),)) if n else cls()

    @classmethod
    def parse(cls, text: str) -> "Ordinal":
        return parse_ordinal(text)

    def coefficient(self, exponent: ExtRank) -> int:
        for e, c in self.terms:
            if e == exponent:
                return c
        return 0

    def as_dict(self):
        return dict(self.terms)

    @property
    def is_finite(self) -> bool:
        return all(e == ExtRank.fin(0) for e, _ in self.terms)

    def __lt__(self, other):
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms < other.terms

    def __bool__(self):
        return bool(self.terms)

    def __str__(self):
        return format_ordinal(self)

    def __repr__(self):
        return f"Ordinal({format_ordinal(self)!r})"


ZERO = Ordinal()
ONE = Ordinal.finite(1)


def compare(a: Ordinal, b: Ordinal) -> Cmp:
    if a.terms == b.terms:
        return Cmp.EQ
    return Cmp.LT if a.terms < b.terms else Cmp.GT


def nat_sum(a: Ordinal, b: Ordinal) -> Ordinal:
    """Hessenberg sum: add coefficients exponent by exponent."""
    merged = a.as_dict()
    for e, c in b.terms:
        merged[e] = merged.get(e, 0) + c
    return Ordinal.from_mapping(merged)


def nat_mul(a: Ordinal, k: int) -> Ordinal:
    if k < 0:
        raise ValueError("multiplier must be a natural number")
    if k == 0:
        return ZERO
    return Ordinal(tuple((e, c * k) for e, c in a.terms))


def omega_pow(r: ExtRank) -> Ordinal:
    if r.is_arrow or r.is_minus_one:
        raise OmegaPowError(f"w^{r} is not an exponent of the distance bounds")
    return Ordinal(((r, 1),))


def nat_diff(a: Ordinal, b: Ordinal) -> Ordinal:
    mine = a.as_dict()
    for e, c in b.terms:
        if mine.get(e, 0) < c:
            raise DominanceError(f"{b} does not sit coefficient-wise under {a}")
        mine[e] -= c
    return Ordinal.from_mapping(mine)


def min_ordinal(values: Iterable[Ordinal]) -> Ordinal:
    values = list(values)
    if not values:
        raise EmptySetError("min_ordinal of an empty set")
    return min(values)


def format_ordinal(a: Ordinal) -> str:
    if not a.terms:
        return "0"
    parts = []
    for e, c in a.terms:
        if e == ExtRank.fin(0):
            parts.append(str(c))
            continue
        base = "w" if e == ExtRank.fin(1) else ("w^w" if e.is_omega else f"w^{e.k}")
        parts.append(base if c == 1 else f"{base}*{c}")
    return "+".join(parts)


class _OrdinalParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise OrdinalSyntaxError(message, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def integer(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected a natural number")
        return int(self.text[start:self.pos])

    def term(self) -> Term:
        if self.peek() == "w":
            self.pos += 1
            exponent = ExtRank.fin(1)
            if self.peek() == "^":
                self.pos += 1
                if self.peek() == "w":
                    self.pos += 1
                    exponent = OMEGA
                else:
                    exponent = ExtRank.fin(self.integer())
            coefficient = 1
            if self.peek() == "*":
                self.pos += 1
                coefficient = self.integer()
            return exponent, coefficient
        return ExtRank.fin(0), self.integer()

    def parse(self) -> Ordinal:
        if not self.text.strip():
            self.error("empty ordinal")
        terms = []
        while True:
            start = self.pos
            exponent, coefficient = self.term()
            if coefficient == 0:
                if terms or self.peek() == "+" or exponent != ExtRank.fin(0):
                    self.pos = start
                    self.error("zero coefficient")
            elif terms and not exponent < terms[-1][0]:
                self.pos = start
                self.error("exponents must be strictly descending")
            else:
                terms.append((exponent, coefficient))
            if self.peek() == "+":
                self.pos += 1
                continue
            break
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return Ordinal(tuple(terms))


def parse_ordinal(text: str) -> Ordinal:
    """Parse the `w^k*c + ...` syntax; `w` is w^1 and `w^w` the omega exponent.

    >>> str(parse_ordinal("w^2*2+w*4"))
    'w^2*2+w*4'
    >>> parse_ordinal("w*3+8") > parse_ordinal("w*3+7")
    True
    """
    return _OrdinalParser(text).parse()
