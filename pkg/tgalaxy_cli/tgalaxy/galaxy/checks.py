"""
Constructions and audits built on the galaxy partition: witness chains around a
non-principal galaxy, containment of section hypernodes in the principal
galaxy, propagation of a single galaxy to higher ranks, hyperbranches and the
one-or-infinitely-many dichotomy.
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Tuple, Union

from joblib import Parallel, delayed

from tgalaxy.core.errors import (
    ArrowOmegaRank,
    HypothesisViolated,
    NotArmIndexed,
    RankOrder,
    SectionNotNested,
)
from tgalaxy.core.utils import get_logger
from tgalaxy.galaxy.engine import GalaxyClass, classify, closer_than, restrict_residue, worker_count
from tgalaxy.hyper.context import EnlargementContext, Hypernode
from tgalaxy.hyper.engine import hyperdistance, limitedly_distant
from tgalaxy.hyper.presentations import ArmIndexed, IndexMap, Presentation, RayIndexed, Standard, lcm
from tgalaxy.hyper.verdicts import LimitVerdict, No, Yes
from tgalaxy.metric.search import wdistance
from tgalaxy.ordinal import Cmp, ExtRank, OrdinalPoly, compare, eventually_compare, nat_mul, omega_pow
from tgalaxy.ordinal.poly import poly_nat_mul, poly_nat_sum, truncate_below
from tgalaxy.sections.engine import SectionEngine, escape_presentation, wsections
from tgalaxy.sections.model import SectionRef, nested
from tgalaxy.wgraph.refs import WNodeRef, parse_branch_id, split_local

logger = get_logger("galaxy")

CONTAINMENT_SAMPLES = 64
# copies of a section family checked by containment_check
FAMILY_INSTANCES = 3


# ---------------------------------------------------------------- witness chains

@dataclass
class WitnessChain:
    rank: ExtRank
    around: str
    classes: List[GalaxyClass]
    presentations: Dict[str, str]
    sandwich: Dict[str, bool]
    non_principal: Dict[str, bool]
    pairwise: Dict[Tuple[str, str], LimitVerdict] = field(default_factory=dict)
    reverse_ok: bool = True

    @property
    def names(self) -> List[str]:
        return [c.id for c in self.classes]

    @property
    def ok(self) -> bool:
        return (all(self.sandwich.values()) and all(self.non_principal.values())
                and all(isinstance(v, Yes) for v in self.pairwise.values()) and self.reverse_ok)

    def to_json(self):
        return {
            "rank": self.rank.to_json(),
            "around": self.around,
            "chain": [{"name": n, "presentation": self.presentations[n],
                       "sandwich": self.sandwich.get(n, True), "non_principal": self.non_principal[n]}
                      for n in self.names],
            "pairwise": [{"closer": a, "farther": b, **v.to_json()} for (a, b), v in sorted(self.pairwise.items())],
            "reverse_ok": self.reverse_ok,
            "ok": self.ok,
        }


def _affine_arm(h: Hypernode) -> ArmIndexed:
    p = h.presentation
    if not isinstance(p, ArmIndexed):
        raise NotArmIndexed(f"{h.name} is {p.format()}, not arm-indexed")
    ix = p.index
    if not ix.is_affine or ix.divisor != 1 or ix.floor != 0 or ix.slope < 1:
        raise NotArmIndexed(f"{h.name} needs an index map a*n+b with a >= 1, got {ix}")
    return p


def _aligned(fa, fb):
    """Both residue decompositions restricted to their common modulus."""
    M = lcm(fa[0][0].modulus, fb[0][0].modulus)
    for r in range(M):
        yield M, r, restrict_residue(fa, M, r), restrict_residue(fb, M, r)


def _between(ctx, reference: str, prev: str, name: str, rho: ExtRank) -> bool:
    """d(x, prev) <= 3 d(x, u) <= 2 d(x, prev) at the w^rho level, eventually on every residue."""
    for _, _, fp, fu in _aligned(hyperdistance(ctx, reference, prev), hyperdistance(ctx, reference, name)):
        tp, tu = truncate_below(fp, rho), truncate_below(fu, rho)
        if eventually_compare(tp, poly_nat_mul(tu, 3)) == Cmp.GT:
            return False
        if eventually_compare(poly_nat_mul(tu, 3), poly_nat_mul(tp, 2)) == Cmp.GT:
            return False
    return True


def _beyond(ctx, reference: str, prev: str, name: str, rho: ExtRank) -> bool:
    """d(x, w) >= d(x, prev) + w^rho * n at the w^rho level, eventually on every residue."""
    for M, r, fp, fw in _aligned(hyperdistance(ctx, reference, prev), hyperdistance(ctx, reference, name)):
        step = OrdinalPoly.of({rho: (r, M)})
        target = poly_nat_sum(truncate_below(fp, rho), step)
        if eventually_compare(truncate_below(fw, rho), target) == Cmp.LT:
            return False
    return True


def witness_chain(ctx: EnlargementContext, v: Union[Hypernode, str], depth: int, rho: ExtRank,
                  *, jobs: Optional[int] = None) -> WitnessChain:
    """2*depth + 1 galaxies ordered by closeness around the galaxy of v, each claim re-verified."""
    if rho.is_arrow:
        raise ArrowOmegaRank("witness chains are built at finite ranks and at omega")
    if isinstance(v, Hypernode):
        v = ctx.own(v).name
    ctx = ctx.with_reference()
    v = ctx[v]
    p = _affine_arm(v)
    reference = ctx.reference_name()
    if not isinstance(limitedly_distant(ctx, reference, v, rho), No):
        raise HypothesisViolated(f"{v.name} is not outside the principal {rho}-galaxy")

    a, b = p.index.slope, p.index.offset
    closer, farther = {}, {}
    for j in range(1, depth + 1):
        closer[f"{v.name}.u{j}"] = ArmIndexed(p.arm, IndexMap((b, a), 2 ** j, 1), p.local)
        farther[f"{v.name}.w{j}"] = ArmIndexed(p.arm, IndexMap((b * (j + 1), a * (j + 1) + 1)), p.local)
    chain_ctx = ctx.copy({**closer, **farther})

    sandwich: Dict[str, bool] = {}
    prev = v.name
    for name in closer:
        sandwich[name] = _between(chain_ctx, reference, prev, name, rho)
        prev = name
    prev = v.name
    for name in farther:
        sandwich[name] = _beyond(chain_ctx, reference, prev, name, rho)
        prev = name

    names = list(reversed(list(closer))) + [v.name] + list(farther)
    non_principal = {n: isinstance(limitedly_distant(chain_ctx, reference, n, rho), No) for n in names}
    classes = [GalaxyClass((n,)) for n in names]

    pairs = list(combinations(range(len(classes)), 2))
    forward = Parallel(n_jobs=worker_count(jobs), prefer="threads")(
        delayed(closer_than)(chain_ctx, classes[i], classes[j], rho, reference=reference) for i, j in pairs
    )
    backward = Parallel(n_jobs=worker_count(jobs), prefer="threads")(
        delayed(closer_than)(chain_ctx, classes[j], classes[i], rho, reference=reference) for i, j in pairs
    )
    pairwise = {(names[i], names[j]): f for (i, j), f in zip(pairs, forward)}
    reverse_ok = all(isinstance(r, No) for r in backward)

    presentations = {n: chain_ctx[n].presentation.format() for n in names}
    chain = WitnessChain(rho, v.name, classes, presentations, sandwich, non_principal, pairwise, reverse_ok)
    logger.info("witness chain of %d galaxies around %s at rank %s: %s",
                len(classes), v.name, rho, "verified" if chain.ok else "FAILED")
    return chain


# ---------------------------------------------------------------- containment

def _node(scope: str, block, local: str) -> WNodeRef:
    name, pos = split_local(local)
    return WNodeRef(scope, block, name, pos)


def sample_containment_presentations(ctx: EnlargementContext, s: SectionRef, limit: int = 4) -> Dict[str, Presentation]:
    """Standard nodes, ray sequences and arm sequences carried by s."""
    out: Dict[str, Presentation] = {}

    def add(p: Presentation):
        out.setdefault(p.format(), p)

    for key in sorted(s.sample_keys())[:limit]:
        k = parse_branch_id(key)
        if k.local.endswith("@*"):
            ray = k.local[:-2]
            add(Standard(WNodeRef(k.scope, k.block, ray, 1)))
            add(RayIndexed(k.scope, k.block, ray, IndexMap.affine(1, 0)))
        else:
            u, _ = k.local.split("~", 1)
            add(Standard(_node(k.scope, k.block, u)))
    for t in s.tails:
        for local in sorted(t.locals):
            start = local[:-2] + "@0" if local.endswith("@*") else local.split("~", 1)[0]
            add(ArmIndexed(t.arm, IndexMap.affine(1, t.start), start))
    return out


def section_containment(ctx: EnlargementContext, s_alpha: SectionRef, s_rho: SectionRef,
                        presentations: Optional[Dict[str, Presentation]] = None,
                        *, jobs: Optional[int] = None) -> bool:
    """Every presentation carried by s_alpha falls into the principal galaxy of s_rho."""
    if not s_alpha.rank < s_rho.rank:
        raise RankOrder(f"containment needs alpha < rho, got {s_alpha.rank} and {s_rho.rank}")
    if not nested(s_alpha, s_rho):
        raise SectionNotNested(f"section {s_alpha} does not lie in {s_rho}")
    g = ctx.graph
    engine = SectionEngine.of(g)
    presentations = presentations or sample_containment_presentations(ctx, s_alpha)
    for name, p in sorted(presentations.items()):
        for n in range(CONTAINMENT_SAMPLES):
            if not engine.carries(g.resolve(p.node_at(n)), s_alpha):
                raise SectionNotNested(f"{name} leaves section {s_alpha} at n={n} ({p.node_at(n)})")
    if not any(isinstance(p, Standard) for p in presentations.values()):
        first = presentations[min(presentations)]
        anchor = Standard(first.node_at(0))
        presentations = {**presentations, anchor.format(): anchor}

    rho = s_rho.rank
    sub = EnlargementContext(g, presentations)
    part = classify(sub, rho, jobs=jobs, rank_cap=rho if rho.is_finite else None)
    escaped = [n for c in part.classes if not c.principal for n in c.members]
    if escaped:
        logger.info("containment %s in %s: %s outside the principal galaxy", s_alpha, s_rho, escaped)
    return not escaped


# ---------------------------------------------------------------- propagation and audits

def single_galaxy_propagation(ctx: EnlargementContext, rho: ExtRank, *, jobs: Optional[int] = None) -> bool:
    """One rho-galaxy implies one sigma-galaxy for every higher rank sigma."""
    if len(classify(ctx, rho, jobs=jobs).classes) > 1:
        logger.warning("more than one %s-galaxy; propagation holds vacuously", rho)
        return True
    for sigma in ctx.graph.ranks():
        if sigma > rho and len(classify(ctx, sigma, jobs=jobs).classes) != 1:
            logger.info("one %s-galaxy but several %s-galaxies", rho, sigma)
            return False
    return True


def _branch_pairs(ctx: EnlargementContext) -> List[Tuple[Presentation, Presentation]]:
    g = ctx.graph
    pairs = []
    for u, v in g.core.branches:
        pairs.append((Standard(_node("", None, u)), Standard(_node("", None, v))))
    for r in g.core.rays:
        pairs.append((Standard(WNodeRef("", None, r.id, 0)), Standard(WNodeRef("", None, r.id, 1))))
    for arm in g.arms:
        ends = list(arm.cell.branches) + [(f"{r.id}@0", f"{r.id}@1") for r in arm.cell.rays]
        for u, v in ends:
            ix = IndexMap.affine(1, 0)
            pairs.append((ArmIndexed(arm.id, ix, u), ArmIndexed(arm.id, ix, v)))
    return pairs


def hyperbranch_check(ctx: EnlargementContext, rho: ExtRank) -> Dict:
    """Endpoints of every hyperbranch are rho-limitedly distant with witness at most 1."""
    pairs = _branch_pairs(ctx)
    extra = {}
    for p, q in pairs:
        extra[p.format()] = p
        extra[q.format()] = q
    sub = ctx.copy(extra)
    failures = []
    for p, q in pairs:
        verdict = limitedly_distant(sub, p.format(), q.format(), rho)
        if not (isinstance(verdict, Yes) and verdict.mu <= 1):
            failures.append({"a": p.format(), "b": q.format(), **verdict.to_json()})
    logger.info("hyperbranch check at rank %s: %d pair(s), %d failure(s)", rho, len(pairs), len(failures))
    return {"rank": rho.to_json(), "pairs_checked": len(pairs), "failures": failures, "ok": not failures}


def dichotomy_check(ctx: EnlargementContext, rho: ExtRank, depth: int, *, jobs: Optional[int] = None) -> Dict:
    """Either a single rho-galaxy or a verified chain of 2*depth + 1 galaxies."""
    part = classify(ctx, rho, jobs=jobs)
    if len(part.classes) == 1:
        return {"rank": rho.to_json(), "outcome": "single", "galaxies": 1, "ok": True}
    for c in part.classes:
        if c.principal:
            continue
        for name in c.members:
            try:
                _affine_arm(part.context[name])
                chain = witness_chain(part.context, name, depth, rho, jobs=jobs)
            except (NotArmIndexed, HypothesisViolated):
                continue
            return {"rank": rho.to_json(), "outcome": "chain", "around": name,
                    "galaxies": len(chain.classes), "ok": chain.ok and len(chain.classes) == 2 * depth + 1}
    logger.warning("no affine arm-indexed presentation outside the principal %s-galaxy", rho)
    return {"rank": rho.to_json(), "outcome": "undetermined", "galaxies": len(part.classes), "ok": False}


# ---------------------------------------------------------------- suite-wide checks

def _instances(s: SectionRef) -> List[SectionRef]:
    if not s.is_family:
        return [s]
    return [s.family.instance(j) for j in range(s.family.start, s.family.start + FAMILY_INSTANCES)]


def containment_check(ctx: EnlargementContext, *, jobs: Optional[int] = None) -> Dict:
    """section_containment over every nested pair of sections of ranks alpha < rho."""
    g = ctx.graph
    ranks = [r for r in g.ranks() if not r.is_arrow]
    by_rank = {r: [c for s in wsections(g, r) for c in _instances(s)] for r in ranks}
    pairs, failures = 0, []
    for i, alpha in enumerate(ranks):
        for rho in ranks[i + 1:]:
            for inner in by_rank[alpha]:
                for outer in by_rank[rho]:
                    if not nested(inner, outer):
                        continue
                    pairs += 1
                    try:
                        held = section_containment(ctx, inner, outer, jobs=jobs)
                    except SectionNotNested as exc:
                        failures.append({"inner": inner.id, "outer": outer.id, "reason": str(exc)})
                        continue
                    if not held:
                        failures.append({"inner": inner.id, "outer": outer.id, "reason": "escaped principal galaxy"})
    logger.info("containment: %d nested pair(s), %d failure(s)", pairs, len(failures))
    return {"pairs_checked": pairs, "failures": failures, "ok": not failures}


def escape_check(ctx: EnlargementContext, rho: ExtRank, count: int, *, jobs: Optional[int] = None) -> Dict:
    """Escape walks in every locally finite rho-section with infinitely many boundary wnodes."""
    g = ctx.graph
    engine = SectionEngine.of(g)
    unit = omega_pow(rho)
    walks, failures = [], []
    for s in wsections(g, rho):
        if s.is_family or not engine.locally_rho_finite(s) or not engine.has_infinite_boundary(s):
            continue
        x0 = engine.boundary_wnodes(s)[0]
        picks = engine.escape_walk(s, x0, count)
        bounds_ok = all(compare(wdistance(g, x0, w), nat_mul(unit, k)) != Cmp.LT
                        for k, (w, _) in enumerate(picks, start=1))
        outside = None
        if count >= 2:
            p = escape_presentation(g, picks)
            sub = EnlargementContext(g, {"escape": p, Standard(x0).format(): Standard(x0)})
            part = classify(sub, rho, jobs=jobs)
            outside = not part.class_of("escape").principal
        ok = bounds_ok and outside is not False
        walks.append({"section": s.id, "start": str(x0), "picks": [str(w) for w, _ in picks],
                      "bounds_ok": bounds_ok, "outside_principal": outside, "ok": ok})
        if not ok:
            failures.append(s.id)
    if not walks:
        logger.warning("no locally %s-finite section with an infinite boundary; escape check is vacuous", rho)
    return {"rank": rho.to_json(), "count": count, "walks": walks, "failures": failures, "ok": not failures}
