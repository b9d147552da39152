"""
Symbolic ordinal-valued functions of an index n.

An OrdinalPoly maps each CNF exponent to an integer polynomial in n (stored as a
coefficient tuple, constant term first). From `valid_from` on every coefficient
polynomial is nonnegative, so evaluation always yields a well-formed Ordinal.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Mapping, Optional, Tuple, Union

from tgalaxy.core.errors import BelowValidFromError, FitFailure, TGalaxyError
from tgalaxy.core.utils import get_logger
from tgalaxy.ordinal.arith import (
    ARROW_OMEGA,
    Cmp,
    ExtRank,
    Ordinal,
)

logger = get_logger("ordinal")

Poly = Tuple[int, ...]


# ---------------------------------------------------------------- polynomials

def poly_trim(p) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def poly_add(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return poly_trim((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))


def poly_sub(p: Poly, q: Poly) -> Poly:
    return poly_add(p, tuple(-c for c in q))


def poly_scale(p: Poly, k: int) -> Poly:
    return poly_trim(c * k for c in p)


def poly_mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return poly_trim(out)


def poly_eval(p: Poly, n: int) -> int:
    value = 0
    for c in reversed(p):
        value = value * n + c
    return value


def poly_compose_affine(p: Poly, a: int, b: int) -> Poly:
    """p(a*k + b) as a polynomial in k."""
    result: Poly = ()
    power: Poly = (1,)
    step = poly_trim((b, a))
    for c in p:
        result = poly_add(result, poly_scale(power, c))
        power = poly_mul(power, step)
    return result


def poly_lead(p: Poly) -> int:
    return p[-1] if p else 0


def poly_is_constant(p: Poly) -> bool:
    return len(p) <= 1


def poly_str(p: Poly, var: str = "n") -> str:
    if not p:
        return "0"
    parts = []
    for i in range(len(p) - 1, -1, -1):
        c = p[i]
        if c == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mono and abs(c) == 1:
            body = mono
        else:
            body = f"{abs(c)}{mono}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += sign + body
    return text


def poly_nonnegative_from(p: Poly) -> Optional[int]:
    """Least n0 >= 0 with p(n) >= 0 for every n >= n0, or None if p goes negative."""
    if not p:
        return 0
    lead = poly_lead(p)
    if lead < 0:
        return None
    # Cauchy bound: p keeps the sign of its leading coefficient past it
    bound = 1 + max((abs(Fraction(c, lead)) for c in p[:-1]), default=0)
    last_bad = -1
    for n in range(int(bound) + 2):
        if poly_eval(p, n) < 0:
            last_bad = n
    return last_bad + 1


# --------------------------------------------------------------- growth class

@dataclass(frozen=True)
class BoundedBy:
    mu: int

    def __str__(self):
        return f"BoundedBy({self.mu})"


@dataclass(frozen=True)
class Unbounded:
    def __str__(self):
        return "Unbounded"


UNBOUNDED = Unbounded()
Growth = Union[BoundedBy, Unbounded]


# ---------------------------------------------------------------- OrdinalPoly

@dataclass(frozen=True)
class OrdinalPoly:
    terms: Tuple[Tuple[ExtRank, Poly], ...] = ()
    valid_from: int = 0

    def __post_init__(self):
        for exponent, p in self.terms:
            if exponent.is_arrow or exponent.is_minus_one:
                raise ValueError(f"invalid exponent {exponent}")
            if not p:
                raise ValueError("zero coefficient polynomials are dropped, not stored")
            start = poly_nonnegative_from(p)
            if start is None:
                raise ValueError(f"coefficient {poly_str(p)} has a negative leading coefficient")
            if start > self.valid_from:
                raise ValueError(f"coefficient {poly_str(p)} is negative at n={start - 1} >= valid_from")
        exponents = [e for e, _ in self.terms]
        if exponents != sorted(set(exponents), reverse=True):
            raise ValueError("exponents must be strictly descending")

    @classmethod
    def of(cls, mapping: Mapping[ExtRank, Poly], valid_from: int = 0) -> "OrdinalPoly":
        items = tuple(sorted(((e, poly_trim(p)) for e, p in mapping.items() if poly_trim(p)), reverse=True))
        return cls(items, valid_from)

    @classmethod
    def constant(cls, value: Ordinal, valid_from: int = 0) -> "OrdinalPoly":
        return cls(tuple((e, (c,)) for e, c in value.terms), valid_from)

    def as_dict(self) -> Dict[ExtRank, Poly]:
        return dict(self.terms)

    def coefficient(self, exponent: ExtRank) -> Poly:
        return self.as_dict().get(exponent, ())

    def evaluate(self, n: int) -> Ordinal:
        return poly_evaluate(self, n)

    def compose_affine(self, a: int, b: int) -> "OrdinalPoly":
        """Substitute n = a*k + b; used to refine residue classes."""
        if a < 1:
            raise ValueError("refinement stride must be positive")
        mapping = {e: poly_compose_affine(p, a, b) for e, p in self.terms}
        start = max(0, -(-(self.valid_from - b) // a))
        return OrdinalPoly.of(mapping, start)

    def to_json(self):
        return {
            "valid_from": self.valid_from,
            "terms": [{"exponent": e.to_json(), "coefficients": list(p)} for e, p in self.terms],
        }

    def format(self, var: str = "n") -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, p in self.terms:
            coeff = poly_str(p, var)
            if not poly_is_constant(p):
                coeff = f"({coeff})"
            if e == ExtRank.fin(0):
                parts.append(coeff)
                continue
            base = "w" if e == ExtRank.fin(1) else ("w^w" if e.is_omega else f"w^{e.k}")
            parts.append(base if coeff == "1" else f"{base}*{coeff}")
        return "+".join(parts)

    def __str__(self):
        return self.format()


def poly_evaluate(f: OrdinalPoly, n: int) -> Ordinal:
    if n < f.valid_from:
        raise BelowValidFromError(f"n={n} is below valid_from={f.valid_from}")
    return Ordinal.from_mapping({e: poly_eval(p, n) for e, p in f.terms})


def poly_growth_class(f: OrdinalPoly, rho: ExtRank) -> Growth:
    """Least mu with f(n) <= w^rho * mu for all n >= valid_from (w^mu for warrow)."""
    if rho.is_minus_one:
        raise ValueError("growth threshold must be a rank >= 0")
    if rho == ARROW_OMEGA:
        if any(e.is_omega for e, _ in f.terms):
            return UNBOUNDED
        if not f.terms:
            return BoundedBy(0)
        top, p = f.terms[0]
        exact_power = p == (1,) and len(f.terms) == 1
        return BoundedBy(top.k if exact_power else top.k + 1)
    if any(e > rho for e, _ in f.terms):
        return UNBOUNDED
    at = f.coefficient(rho)
    if not poly_is_constant(at):
        return UNBOUNDED
    c = at[0] if at else 0
    lower = any(e < rho for e, _ in f.terms)
    return BoundedBy(c + 1 if lower else c)


def eventually_compare(f: OrdinalPoly, g: OrdinalPoly) -> Cmp:
    """Order of f(n) and g(n) for all sufficiently large n."""
    fd, gd = f.as_dict(), g.as_dict()
    for e in sorted(set(fd) | set(gd), reverse=True):
        diff = poly_sub(fd.get(e, ()), gd.get(e, ()))
        if diff:
            return Cmp.GT if poly_lead(diff) > 0 else Cmp.LT
    return Cmp.EQ


def poly_nat_sum(f: OrdinalPoly, g: OrdinalPoly) -> OrdinalPoly:
    fd = f.as_dict()
    for e, p in g.terms:
        fd[e] = poly_add(fd.get(e, ()), p)
    return OrdinalPoly.of(fd, max(f.valid_from, g.valid_from))


def poly_nat_mul(f: OrdinalPoly, k: int) -> OrdinalPoly:
    return OrdinalPoly.of({e: poly_scale(p, k) for e, p in f.terms}, f.valid_from)


def truncate_below(f: OrdinalPoly, rho: ExtRank) -> OrdinalPoly:
    """Keep only the terms with exponent >= rho."""
    return OrdinalPoly.of({e: p for e, p in f.terms if e >= rho}, f.valid_from)


# -------------------------------------------------------------------- fitting

def _interpolate(xs, ys) -> Poly:
    """Exact interpolating polynomial through integer points; FitFailure if not integral."""
    coeffs = [Fraction(0)] * len(xs)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j == i:
                continue
            nxt = [Fraction(0)] * (len(basis) + 1)
            for d, c in enumerate(basis):
                nxt[d + 1] += c
                nxt[d] -= c * xj
            basis = nxt
            denom *= xi - xj
        for d, c in enumerate(basis):
            coeffs[d] += c * yi / denom
    if any(c.denominator != 1 for c in coeffs):
        raise FitFailure(f"samples {list(zip(xs, ys))} are not fitted by an integer polynomial")
    return poly_trim(int(c) for c in coeffs)


def fit_ordinal_poly(
    sample: Callable[[int], Ordinal],
    start: int,
    *,
    fit_points: int = 3,
    check_points: int = 2,
    extend_down: bool = True,
) -> OrdinalPoly:
    """Fit per-exponent polynomials on `fit_points` consecutive indices and verify on the next ones."""
    xs = list(range(start, start + fit_points))
    values = [sample(n) for n in xs]
    exponents = sorted({e for v in values for e, _ in v.terms}, reverse=True)
    mapping = {e: _interpolate(xs, [v.coefficient(e) for v in values]) for e in exponents}
    try:
        fitted = OrdinalPoly.of(mapping, start)
    except ValueError as exc:
        raise FitFailure(str(exc)) from exc
    for n in range(start + fit_points, start + fit_points + check_points):
        observed = sample(n)
        if fitted.evaluate(n) != observed:
            raise FitFailure(f"fit {fitted} predicts {fitted.evaluate(n)} at n={n}, observed {observed}")
    valid_from = start
    if extend_down:
        for n in range(start - 1, -1, -1):
            try:
                candidate = OrdinalPoly(fitted.terms, n)
                observed = sample(n)
            except (ValueError, LookupError, TGalaxyError):
                break
            if candidate.evaluate(n) != observed:
                break
            valid_from = n
    logger.debug("fitted %s valid from %d", fitted, valid_from)
    return OrdinalPoly(fitted.terms, valid_from)
