"""
Certified least-first wdistance.

The search runs over the super-nodes of a skeleton frame of depth D+2 and only
settles super-nodes that reach below copy D ("inner" ones). Every edge from a
settled node into the outer region yields a lower bound for any walk that
leaves; the answer is certified once that bound is no smaller than the
distance found. Otherwise D doubles, up to MAX_DEPTH.
"""
import heapq
from typing import Dict, List, Optional

from tgalaxy.core.config import settings
from tgalaxy.core.errors import Disconnected
from tgalaxy.core.utils import get_logger
from tgalaxy.ordinal.arith import MINUS_ONE, ZERO, ExtRank, Ordinal, nat_sum
from tgalaxy.wgraph.presentation import WGraphPresentation
from tgalaxy.wgraph.refs import WNodeRef
from tgalaxy.wgraph.steps import RaySegment, Step, TipTraversal
from tgalaxy.wgraph.unroll import Edge, Frame, edge_order, flip_step, ref_key
from tgalaxy.metric.walks import WalkSpec

logger = get_logger("metric")


def _initial_depth(*refs: WNodeRef) -> int:
    need = max([r.copy_index for r in refs] + [0]) + 2
    d = 1
    while d < need:
        d *= 2
    return d


class _Overlay:
    """Super-node adjacency of a frame plus the ray positions it does not keep."""

    def __init__(self, frame: Frame, refs):
        self.frame = frame
        self.adj = frame.supernode_adjacency()
        self.extra: Dict[WNodeRef, Dict[WNodeRef, Edge]] = {}
        virtual = [r for r in refs if r.is_ray and r not in frame.atom_rank]
        for r in virtual:
            for e in frame.virtual_edges(r):
                self._add(self.node(e.u), self.node(e.v), e)
        for i, a in enumerate(virtual):
            for b in virtual[i + 1:]:
                if (a.scope, a.block, a.local) == (b.scope, b.block, b.local) and a != b:
                    lo, hi = sorted((a, b), key=lambda r: r.position)
                    step = RaySegment(f"{lo.prefix}{lo.local}", lo.position, hi.position)
                    self._add(lo, hi, Edge(lo, hi, Ordinal.finite(hi.position - lo.position), step))

    def node(self, ref: WNodeRef) -> WNodeRef:
        s = self.frame.supernode_of(ref)
        return ref if s is None else s

    def _add(self, a, b, e: Edge):
        for x, y, edge in ((a, b, e), (b, a, Edge(e.v, e.u, e.weight, flip_step(e.step)))):
            slot = self.extra.setdefault(x, {})
            best = slot.get(y)
            if best is None or edge_order(edge) < edge_order(best):
                slot[y] = edge

    def neighbours(self, u: WNodeRef):
        base = self.adj.get(u, {})
        more = self.extra.get(u)
        if not more:
            return base.items()
        merged = dict(base)
        for v, e in more.items():
            if v not in merged or edge_order(e) < edge_order(merged[v]):
                merged[v] = e
        return merged.items()


def _inner(frame: Frame, limit: int):
    min_copy = frame.supernode_min_copy()

    def inner(node: WNodeRef) -> bool:
        c = min_copy.get(node)
        if c is None:
            c = node.copy_index
        return c < limit
    return inner


def _dijkstra(overlay: _Overlay, source: WNodeRef, target: Optional[WNodeRef], inner):
    """Settle inner nodes from `source`; returns (settled distances, exit bound)."""
    dist: Dict[WNodeRef, Ordinal] = {source: ZERO}
    done = set()
    exit_bound: Optional[Ordinal] = None
    heap = [(ZERO, ref_key(source), source)]
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == target:
            break
        for v, e in overlay.neighbours(u):
            nd = nat_sum(d, e.weight)
            if not inner(v):
                if exit_bound is None or nd < exit_bound:
                    exit_bound = nd
                continue
            if v in done:
                continue
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, ref_key(v), v))
    settled = {k: v for k, v in dist.items() if k in done}
    return settled, exit_bound


def _certified_search(g: WGraphPresentation, x: WNodeRef, y: WNodeRef, rank_cap: Optional[ExtRank]):
    cg = g.compiled()
    depth = _initial_depth(x, y)
    while True:
        frame = cg.frame(depth + 2, rank_cap=rank_cap)
        overlay = _Overlay(frame, (x, y))
        sx, sy = overlay.node(x), overlay.node(y)
        inner = _inner(frame, depth) if g.arms else (lambda node: True)
        dist, exit_bound = _dijkstra(overlay, sy, sx, inner)
        found = dist.get(sx)
        if found is not None and (exit_bound is None or not exit_bound < found):
            logger.debug("d(%s,%s)=%s certified at depth %d", x, y, found, depth)
            return found, frame, overlay, dist
        if found is None and exit_bound is None:
            raise Disconnected(f"{x} and {y} are not joined by any walk")
        if depth >= settings.MAX_DEPTH:
            raise Disconnected(f"no certified walk from {x} to {y} below depth {settings.MAX_DEPTH}")
        depth = min(depth * 2, settings.MAX_DEPTH)
        logger.debug("deepening d(%s,%s) search to %d", x, y, depth)


def wdistance(g: WGraphPresentation, x, y, *, rank_cap: Optional[ExtRank] = None) -> Ordinal:
    """Least walk length between the maximal wnodes embracing x and y."""
    x, y = g.resolve(x), g.resolve(y)
    if x == y:
        return ZERO
    cg = g.compiled()
    key = (x, y, rank_cap)
    with cg.memo_lock:
        cached = cg.distance_memo.get(key)
    if cached is not None:
        return cached
    value = _certified_search(g, x, y, rank_cap)[0]
    with cg.memo_lock:
        cg.distance_memo[key] = value
        cg.distance_memo[(y, x, rank_cap)] = value
    return value


def geodesic(g: WGraphPresentation, x, y, *, rank_cap: Optional[ExtRank] = None) -> WalkSpec:
    """A walk of length wdistance(x, y); ties go to the least node-id sequence."""
    x, y = g.resolve(x), g.resolve(y)
    if x == y:
        return WalkSpec.trivial(x)
    total, frame, overlay, dist = _certified_search(g, x, y, rank_cap)

    nodes: List[WNodeRef] = [x]
    steps: List[Step] = []

    def move_to(atom: WNodeRef):
        if atom != nodes[-1]:
            steps.append(TipTraversal(MINUS_ONE))
            nodes.append(atom)

    sx, sy = overlay.node(x), overlay.node(y)
    u = sx
    while u != sy:
        options = []
        for v, e in overlay.neighbours(u):
            dv = dist.get(v)
            if dv is not None and nat_sum(e.weight, dv) == dist[u]:
                options.append((str(e.v), str(v), v, e))
        _, _, v, e = min(options, key=lambda o: (o[0], o[1]))
        move_to(e.u)
        steps.append(e.step)
        nodes.append(e.v)
        u = v
    move_to(y)
    walk = WalkSpec(tuple(nodes), tuple(steps))
    logger.debug("geodesic %s -> %s of length %s with %d steps", x, y, total, len(steps))
    return walk
