"""
Hypernode queries: equivalence, hyperdistance and limited distance.

Every query splits the index set into residue classes n = M*k + r where M is
the common period of the presentations involved, so each class is handled by
one polynomial in k.
"""
from typing import List, Optional, Tuple

from tgalaxy.core.config import settings
from tgalaxy.core.errors import FitFailure, NotMaximal, RankAboveGraph
from tgalaxy.core.utils import get_logger
from tgalaxy.hyper.context import EnlargementContext, Hypernode
from tgalaxy.hyper.presentations import lcm, stable_start
from tgalaxy.hyper.verdicts import LimitVerdict, No, ResidueClass, Yes, merge_residues
from tgalaxy.metric.search import wdistance
from tgalaxy.ordinal.arith import Cmp, ExtRank, compare, nat_sum
from tgalaxy.ordinal.poly import BoundedBy, OrdinalPoly, fit_ordinal_poly, poly_growth_class
from tgalaxy.wgraph.unroll import frame_depth_for, is_maximal

logger = get_logger("hyper")

FIT_RETRIES = 3
WINDOW = 8
FAR = 64

Residues = List[Tuple[ResidueClass, OrdinalPoly]]


def _pair(p: Hypernode, q: Hypernode) -> EnlargementContext:
    ctx = p.ctx
    ctx.own(q)
    return ctx


def common_modulus(*hs: Hypernode) -> int:
    return lcm(*(h.presentation.period() for h in hs))


def _identity(g, node):
    frame = g.compiled().frame(frame_depth_for(node))
    c = frame.class_of(node)
    return node if c is None else c


def _window_verdict(M: int, r: int, start: int, holds) -> bool:
    """Value of a residue-periodic predicate from a window far enough out."""
    values = [holds(M * k + r) for k in range(start, start + WINDOW)]
    if len(set(values)) > 1:
        logger.debug("unsettled window for residue %d mod %d; sampling further out", r, M)
        values = [holds(M * k + r) for k in range(start + FAR, start + FAR + WINDOW)]
        if len(set(values)) > 1:
            raise FitFailure(f"residue {r} mod {M} still alternates {FAR} periods past k={start}")
    return values[0]


def equivalent(p: Hypernode, q: Hypernode) -> LimitVerdict:
    """Cofinite agreement of the carried wnodes, residue by residue."""
    ctx = _pair(p, q)
    g = ctx.graph
    M = common_modulus(p, q)
    out = []
    for r in range(M):
        start = stable_start(M, r, p.presentation, q.presentation)
        same = _window_verdict(M, r, start, lambda n: _identity(g, p.node_at(n)) == _identity(g, q.node_at(n)))
        out.append((ResidueClass(M, r), Yes(0) if same else No()))
    return merge_residues(out)


def is_maximal_hypernode(ctx: EnlargementContext, p: Hypernode) -> LimitVerdict:
    p = ctx.own(p)
    M = common_modulus(p)
    out = []
    for r in range(M):
        start = stable_start(M, r, p.presentation)
        top = _window_verdict(M, r, start, lambda n: is_maximal(ctx.graph, p.node_at(n)))
        out.append((ResidueClass(M, r), Yes(0) if top else No()))
    return merge_residues(out)


def _fit_residue(ctx, p: Hypernode, q: Hypernode, M: int, r: int, rank_cap) -> OrdinalPoly:
    g = ctx.graph

    def sample(k: int):
        n = M * k + r
        return wdistance(g, p.node_at(n), q.node_at(n), rank_cap=rank_cap)

    start = max(settings.FIT_START, stable_start(M, r, p.presentation, q.presentation))
    for attempt in range(FIT_RETRIES + 1):
        try:
            return fit_ordinal_poly(sample, start)
        except FitFailure:
            if attempt == FIT_RETRIES:
                raise
            start = 2 * start + 3
            logger.debug("refitting d(%s,%s) on %d mod %d from k=%d", p, q, r, M, start)


def hyperdistance(ctx: EnlargementContext, p, q, *, rank_cap: Optional[ExtRank] = None) -> Residues:
    """Per residue class n = M*k + r, the OrdinalPoly in k giving d(x_n, y_n)."""
    p, q = ctx.own(p), ctx.own(q)
    M = common_modulus(p, q)
    key = (p.presentation, q.presentation, rank_cap)

    def compute():
        return [(ResidueClass(M, r), _fit_residue(ctx, p, q, M, r, rank_cap)) for r in range(M)]

    return ctx.cached_distance(key, compute)


def _check_rank(ctx: EnlargementContext, rho: ExtRank):
    if rho > ctx.graph.rank:
        raise RankAboveGraph(f"rank {rho} exceeds graph rank {ctx.graph.rank}")


def limitedly_distant(ctx: EnlargementContext, p, q, rho: ExtRank, *, rank_cap: Optional[ExtRank] = None) -> LimitVerdict:
    """Yes(mu) when d(x_n, y_n) <= w^rho * mu on an index set every free ultrafilter contains."""
    _check_rank(ctx, rho)
    out = []
    for rc, f in hyperdistance(ctx, p, q, rank_cap=rank_cap):
        growth = poly_growth_class(f, rho)
        out.append((rc, Yes(growth.mu) if isinstance(growth, BoundedBy) else No()))
    verdict = merge_residues(out)
    logger.debug("limitedly_distant(%s, %s, %s) = %s", p, q, rho, verdict)
    return verdict


def triangle_check(ctx: EnlargementContext, p, q, r, samples: int) -> bool:
    """d(x_n, z_n) <= d(x_n, y_n) # d(y_n, z_n) on the first `samples` indices."""
    p, q, r = ctx.own(p), ctx.own(q), ctx.own(r)
    for h in (p, q, r):
        if not isinstance(is_maximal_hypernode(ctx, h), Yes):
            raise NotMaximal(f"{h} is not a maximal hypernode")
    g = ctx.graph
    for n in range(samples):
        x, y, z = p.node_at(n), q.node_at(n), r.node_at(n)
        direct = wdistance(g, x, z)
        detour = nat_sum(wdistance(g, x, y), wdistance(g, y, z))
        if compare(direct, detour) == Cmp.GT:
            logger.info("triangle inequality fails at n=%d: %s > %s", n, direct, detour)
            return False
    return True
