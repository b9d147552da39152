"""
Galaxies of a finite set of hypernode presentations.

Two presentations share a rho-galaxy when they are rho-limitedly distant. The
pairwise verdict matrix is evaluated in parallel and merged with a union-find
in input order, so the partition never depends on the number of workers.
"""
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Dict, List, Optional, Tuple, Union

import networkx as nx
from joblib import Parallel, delayed
from networkx.utils import UnionFind

from tgalaxy.core.config import settings
from tgalaxy.core.errors import ArrowOmegaRank, ContextMismatch, NoPrincipalReference, RankAboveGraph, RankOrder
from tgalaxy.core.utils import get_logger
from tgalaxy.hyper.context import EnlargementContext
from tgalaxy.hyper.engine import hyperdistance, limitedly_distant
from tgalaxy.hyper.presentations import lcm
from tgalaxy.hyper.verdicts import LimitVerdict, No, ResidueClass, UltrafilterDependent, Yes, merge_residues
from tgalaxy.ordinal import ExtRank, OrdinalPoly
from tgalaxy.ordinal.poly import poly_is_constant, poly_lead, poly_sub

logger = get_logger("galaxy")


@dataclass(frozen=True)
class GalaxyClass:
    members: Tuple[str, ...]
    principal: bool = False

    @property
    def id(self) -> str:
        return self.members[0]

    def __str__(self):
        return "{" + ", ".join(self.members) + "}"

    def to_json(self):
        return {"id": self.id, "members": list(self.members), "principal": self.principal}


@dataclass
class GalaxyPartition:
    rank: ExtRank
    classes: List[GalaxyClass]
    verdicts: Dict[Tuple[str, str], LimitVerdict]
    ambiguities: List[Tuple[str, str, UltrafilterDependent]]
    reference: str
    context: EnlargementContext = field(repr=False)

    @property
    def principal(self) -> GalaxyClass:
        return next(c for c in self.classes if c.principal)

    def class_of(self, name: str) -> GalaxyClass:
        for c in self.classes:
            if name in c.members:
                return c
        raise KeyError(name)

    def to_json(self):
        return {
            "rank": self.rank.to_json(),
            "reference": self.reference,
            "classes": [c.to_json() for c in self.classes],
            "verdicts": [
                {"a": a, "b": b, **v.to_json()} for (a, b), v in sorted(self.verdicts.items())
            ],
            "ambiguities": [{"a": a, "b": b, **v.to_json()} for a, b, v in self.ambiguities],
        }


def _check_rank(ctx: EnlargementContext, rho: ExtRank):
    if rho > ctx.graph.rank:
        raise RankAboveGraph(f"rank {rho} exceeds graph rank {ctx.graph.rank}")


def worker_count(jobs: Optional[int]) -> int:
    return settings.DEFAULT_JOBS if jobs is None else jobs


def classify(ctx: EnlargementContext, rho: ExtRank, *, jobs: Optional[int] = None,
             rank_cap: Optional[ExtRank] = None) -> GalaxyPartition:
    """Partition the context's presentations into rho-galaxies."""
    _check_rank(ctx, rho)
    ctx = ctx.with_reference()
    names = ctx.names()
    pairs = list(combinations(names, 2))
    results = Parallel(n_jobs=worker_count(jobs), prefer="threads")(
        delayed(limitedly_distant)(ctx, a, b, rho, rank_cap=rank_cap) for a, b in pairs
    )
    uf = UnionFind(names)
    verdicts: Dict[Tuple[str, str], LimitVerdict] = {}
    ambiguities = []
    for (a, b), v in zip(pairs, results):
        verdicts[(a, b)] = v
        if isinstance(v, Yes):
            uf.union(a, b)
        elif isinstance(v, UltrafilterDependent):
            ambiguities.append((a, b, v))

    reference = ctx.reference_name()
    classes = []
    for group in uf.to_sets():
        members = tuple(sorted(group))
        classes.append(GalaxyClass(members, reference in group))
    classes.sort(key=lambda c: (not c.principal, c.id))
    logger.info("rank %s: %d presentation(s) in %d galaxy class(es), %d ambiguous pair(s)",
                rho, len(names), len(classes), len(ambiguities))
    return GalaxyPartition(rho, classes, verdicts, ambiguities, reference, ctx)


def refinement_check(ctx: EnlargementContext, alpha: ExtRank, rho: ExtRank, *, jobs: Optional[int] = None) -> bool:
    """Every alpha-galaxy lies inside one rho-galaxy."""
    if not alpha < rho:
        raise RankOrder(f"refinement needs alpha < rho, got {alpha} and {rho}")
    fine = classify(ctx, alpha, jobs=jobs)
    coarse = classify(ctx, rho, jobs=jobs)
    for c in fine.classes:
        targets = {coarse.class_of(m).id for m in c.members}
        if len(targets) > 1:
            logger.info("%s-class %s splits across %s-classes %s", alpha, c, rho, sorted(targets))
            return False
    return True


# ---------------------------------------------------------------- closeness

def restrict_residue(residues, M: int, r: int) -> OrdinalPoly:
    """The polynomial of one residue class n = M*k + r, from a coarser decomposition."""
    m = residues[0][0].modulus
    f = {rc.residue: poly for rc, poly in residues}[r % m]
    return f.compose_affine(M // m, r // m)


def _ahead(far: OrdinalPoly, near: OrdinalPoly, rho: ExtRank) -> bool:
    """far(k) - near(k) exceeds w^rho * m for every m, eventually in k."""
    fd, nd = far.as_dict(), near.as_dict()
    for e in sorted(set(fd) | set(nd), reverse=True):
        if not e > rho:
            break
        diff = poly_sub(fd.get(e, ()), nd.get(e, ()))
        if diff:
            return poly_lead(diff) > 0
    diff = poly_sub(fd.get(rho, ()), nd.get(rho, ()))
    return bool(diff) and not poly_is_constant(diff) and poly_lead(diff) > 0


def closeness(ctx: EnlargementContext, reference: str, y: str, z: str, rho: ExtRank) -> LimitVerdict:
    """Whether y is closer than z to the reference, per residue class."""
    fy = hyperdistance(ctx, reference, y)
    fz = hyperdistance(ctx, reference, z)
    M = lcm(fy[0][0].modulus, fz[0][0].modulus)
    out = []
    for r in range(M):
        ahead = _ahead(restrict_residue(fz, M, r), restrict_residue(fy, M, r), rho)
        out.append((ResidueClass(M, r), Yes(0) if ahead else No()))
    return merge_residues(out)


def _as_class(c: Union[GalaxyClass, str]) -> GalaxyClass:
    return GalaxyClass((c,)) if isinstance(c, str) else c


def closer_than(ctx: EnlargementContext, a, b, rho: ExtRank, *, reference: Optional[str] = None) -> LimitVerdict:
    """Yes when galaxy a is closer to the principal galaxy than galaxy b."""
    if rho.is_arrow:
        raise ArrowOmegaRank("closeness is not defined at rank warrow")
    _check_rank(ctx, rho)
    reference = reference or ctx.reference_name()
    if reference is None:
        raise NoPrincipalReference("closeness needs a standard presentation in the context")
    a, b = _as_class(a), _as_class(b)
    if b.principal:
        return No()
    if a.principal:
        return Yes(0)
    verdict = closeness(ctx, reference, a.id, b.id, rho)
    if len(a.members) > 1 or len(b.members) > 1:
        second = closeness(ctx, reference, a.members[-1], b.members[-1], rho)
        if second != verdict:
            logger.warning("closeness of %s and %s depends on representatives: %s vs %s", a, b, verdict, second)
    return verdict


@dataclass
class OrderReport:
    rank: ExtRank
    classes: List[GalaxyClass]
    edges: List[Tuple[str, str]]
    hasse: List[Tuple[str, str]]
    incomparable: List[Tuple[str, str]]
    ambiguous: List[Tuple[str, str, UltrafilterDependent]]
    antisymmetric: bool
    transitive: bool
    acyclic: bool
    regression: Optional[Dict] = None

    @property
    def total(self) -> bool:
        return not self.incomparable and not self.ambiguous

    @property
    def ok(self) -> bool:
        return (self.antisymmetric and self.transitive and self.acyclic
                and not (self.regression and self.regression["mismatches"]))

    def to_json(self):
        return {
            "rank": self.rank.to_json(),
            "classes": [c.to_json() for c in self.classes],
            "edges": [list(e) for e in self.edges],
            "hasse": [list(e) for e in self.hasse],
            "incomparable": [list(p) for p in self.incomparable],
            "ambiguous": [{"a": a, "b": b, **v.to_json()} for a, b, v in self.ambiguous],
            "antisymmetric": self.antisymmetric,
            "transitive": self.transitive,
            "acyclic": self.acyclic,
            "total": self.total,
            "regression": self.regression,
        }


def _closeness_matrix(ctx, classes, rho, reference, jobs):
    pairs = list(permutations(classes, 2))
    results = Parallel(n_jobs=worker_count(jobs), prefer="threads")(
        delayed(closer_than)(ctx, a, b, rho, reference=reference) for a, b in pairs
    )
    return {(a.id, b.id): v for (a, b), v in zip(pairs, results)}


def order_partition(ctx: EnlargementContext, part: GalaxyPartition, *, jobs: Optional[int] = None) -> OrderReport:
    """Closeness order of the classes, with antisymmetry, acyclicity and transitivity audits."""
    if ctx.graph is not part.context.graph:
        raise ContextMismatch("partition was classified over another graph")
    ctx, rho = part.context, part.rank
    if rho.is_arrow:
        raise ArrowOmegaRank("closeness is not defined at rank warrow")
    classes = part.classes
    matrix = _closeness_matrix(ctx, classes, rho, part.reference, jobs)

    dg = nx.DiGraph()
    dg.add_nodes_from(c.id for c in classes)
    dg.add_edges_from(pair for pair, v in matrix.items() if isinstance(v, Yes))
    antisymmetric = not any(dg.has_edge(b, a) for a, b in dg.edges)
    acyclic = nx.is_directed_acyclic_graph(dg)
    transitive = all(
        dg.has_edge(a, c) for a, b in dg.edges for c in dg.successors(b) if c != a
    )
    incomparable, ambiguous = [], []
    for a, b in combinations(sorted(c.id for c in classes), 2):
        v1, v2 = matrix[(a, b)], matrix[(b, a)]
        for x, y, v in ((a, b, v1), (b, a, v2)):
            if isinstance(v, UltrafilterDependent):
                ambiguous.append((x, y, v))
        if isinstance(v1, No) and isinstance(v2, No):
            incomparable.append((a, b))
    hasse = sorted(nx.transitive_reduction(dg).edges) if acyclic else []

    regression = None
    standards = [n for n in part.principal.members if ctx[n].is_standard and n != part.reference]
    if standards:
        second = standards[0]
        again = _closeness_matrix(ctx, classes, rho, second, jobs)
        mismatches = sorted(f"{a}<{b}" for (a, b), v in matrix.items() if again[(a, b)] != v)
        regression = {"reference": second, "mismatches": mismatches}
    report = OrderReport(rho, classes, sorted(dg.edges), hasse, incomparable, ambiguous,
                         antisymmetric, transitive, acyclic, regression)
    logger.info("order at rank %s: %d edge(s), %d incomparable pair(s), audits %s",
                rho, len(report.edges), len(incomparable), "pass" if report.ok else "FAIL")
    return report
