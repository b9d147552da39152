"""
Section analysis on an explicit reference unrolling.

For a rank rho, branches are linked through every wnode of rank 1..rho (a hub
joins the classes it embraces and the ray positions carrying its tips). The
components of that graph, read off a frame with copies 0..R, are described
symbolically: components reaching the last copy from deep inside the arm are
tails, single-arm components repeating copy after copy are families, and the
rest are fixed.
"""
import heapq
import threading
from typing import Dict, FrozenSet, Iterator, List, Optional, Set, Tuple

import networkx as nx

from tgalaxy.core.config import settings
from tgalaxy.core.errors import (
    ArrowOmegaRank,
    FitFailure,
    HypothesisViolated,
    NotIncident,
    RankAboveGraph,
    RankMismatch,
    UnknownNode,
)
from tgalaxy.core.utils import get_logger
from tgalaxy.hyper.presentations import ArmIndexed, IndexMap
from tgalaxy.metric.search import wdistance
from tgalaxy.metric.walks import WalkSpec
from tgalaxy.ordinal import FIN0, FIN1, MINUS_ONE, ZERO, Cmp, ExtRank, Ordinal, compare, nat_mul, nat_sum, omega_pow
from tgalaxy.sections.model import ArmTail, SectionFamily, SectionRef
from tgalaxy.wgraph.presentation import WGraphPresentation
from tgalaxy.wgraph.refs import WNodeRef, branch_key, parse_branch_id
from tgalaxy.wgraph.steps import BranchStep, TipTraversal, tip_weight
from tgalaxy.wgraph.unroll import Frame, ref_key

logger = get_logger("sections")

# copies searched per requested escape step beyond the reference copy
ESCAPE_SPAN = 32


class SectionEngine:
    """Section queries for one presentation; one instance per compiled graph."""

    def __init__(self, g: WGraphPresentation):
        self.g = g
        self.cg = g.compiled()
        self.R = settings.SECTION_DEPTH
        self._sections: Dict[ExtRank, List[SectionRef]] = {}
        self._lock = threading.Lock()

    @classmethod
    def of(cls, g: WGraphPresentation) -> "SectionEngine":
        cg = g.compiled()
        engine = cg.extras.get("sections")
        if engine is None:
            engine = cg.extras.setdefault("sections", cls(g))
        return engine

    # ----------------------------------------------------------- frames
    @property
    def last_copy(self) -> int:
        return self.R

    @property
    def reference_copy(self) -> int:
        """A copy deep enough inside the arm to show its periodic behaviour."""
        return self.R - 2

    def frame(self, depth: int = 0, reach: int = 0) -> Frame:
        d = max(self.R + 1, depth)
        return self.cg.frame(d, ray_limit=max(d * settings.RAY_UNIT, reach))

    def frame_for(self, *refs: WNodeRef) -> Frame:
        """Smallest cached frame holding the refs; depth and ray reach go up in powers of two."""
        depth = max([r.copy_index for r in refs] + [0]) + 3
        reach = max([r.position or 0 for r in refs] + [0]) + 2
        if depth > self.R + 1:
            depth = 1 << (depth - 1).bit_length()
        return self.frame(depth, 1 << (reach - 1).bit_length())

    def carries(self, x: WNodeRef, s: SectionRef) -> bool:
        """x meets a branch of s directly, through an embraced node or through a collected tip."""
        return any(s.contains(k) for k in self.incidence_keys(x))

    # ----------------------------------------------------------- sections
    def _check_rank(self, rho: ExtRank):
        if rho > self.g.rank:
            raise RankAboveGraph(f"rank {rho} exceeds graph rank {self.g.rank}")
        if rho.is_minus_one:
            raise RankMismatch("sections have rank >= 0")

    @staticmethod
    def _is_hub(rank: ExtRank, rho: ExtRank) -> bool:
        return FIN1 <= rank <= rho

    def _components(self, frame: Frame, rho: ExtRank) -> List[Set[str]]:
        h = nx.Graph()
        h.add_nodes_from(frame.members)
        branches: List[Tuple[WNodeRef, WNodeRef, str]] = []
        for e in frame.edges:
            cu, cv = frame.cls[e.u], frame.cls[e.v]
            if isinstance(e.step, BranchStep):
                branches.append((cu, cv, e.step.branch))
                h.add_edge(cu, cv)
            elif isinstance(e.step, TipTraversal) and self._is_hub(frame.rank[cv], rho):
                h.add_edge(cu, cv)
        for c, rank in frame.rank.items():
            if self._is_hub(rank, rho):
                h.add_edges_from((c, d) for d in frame.descendants(c))
        comp_of = {}
        for i, comp in enumerate(nx.connected_components(h)):
            for c in comp:
                comp_of[c] = i
        groups: Dict[int, Set[str]] = {}
        for cu, _, bid in branches:
            groups.setdefault(comp_of[cu], set()).add(branch_key(bid))
        return list(groups.values())

    def wsections(self, rho: ExtRank) -> List[SectionRef]:
        """Sections of rank rho sorted by id; families stand for one section per arm copy."""
        self._check_rank(rho)
        with self._lock:
            cached = self._sections.get(rho)
        if cached is not None:
            return cached
        frame = self.frame()
        last, ref = self.last_copy, self.reference_copy
        fixed_sections: List[SectionRef] = []
        candidates: Dict[Tuple[str, FrozenSet], List[int]] = {}
        for keys in self._components(frame, rho):
            parsed = [parse_branch_id(k) for k in keys]
            copies: Dict[str, Set[int]] = {}
            for k in parsed:
                if k.block is not None:
                    copies.setdefault(k.scope, set()).add(k.block)
            has_core = any(k.block is None for k in parsed)
            tail_arms = sorted(a for a, cs in copies.items() if last in cs and min(cs) <= last - 2)
            touches_last = any(last in cs for cs in copies.values())
            if tail_arms:
                fixed_sections.append(self._tail_section(rho, parsed, tail_arms, ref))
            elif touches_last:
                if has_core:
                    fixed_sections.append(self._fixed(rho, keys))
                # otherwise a truncated family instance
            elif not has_core and len(copies) == 1:
                (arm, cs), = copies.items()
                m = min(cs)
                template = frozenset((k.block - m, k.local) for k in parsed)
                candidates.setdefault((arm, template), []).append(m)
            else:
                fixed_sections.append(self._fixed(rho, keys))

        out = list(fixed_sections)
        for (arm, template), starts in sorted(candidates.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1]))):
            span = max(off for off, _ in template)
            frontier = last - span - 1
            starts = sorted(starts)
            if starts and starts[-1] == frontier:
                run = frontier
                while run - 1 in starts:
                    run -= 1
                out.append(SectionRef.of_family(SectionFamily(rho, arm, run, template)))
                starts = [m for m in starts if m < run]
            for m in starts:
                fixed = frozenset(f"{arm}[{m + off}].{local}" for off, local in template)
                out.append(self._fixed(rho, fixed))
        out.sort(key=lambda s: s.id)
        logger.debug("rank %s: %d section(s)", rho, len(out))
        with self._lock:
            self._sections[rho] = out
        return out

    @staticmethod
    def _fixed(rho: ExtRank, keys) -> SectionRef:
        keys = frozenset(keys)
        return SectionRef(rho, min(keys), keys)

    @staticmethod
    def _tail_section(rho, parsed, tail_arms, ref: int) -> SectionRef:
        tails = []
        fixed = set()
        for arm in tail_arms:
            def locals_at(c):
                return frozenset(k.local for k in parsed if k.scope == arm and k.block == c)
            pattern = locals_at(ref)
            start = ref
            while start > 0 and locals_at(start - 1) == pattern:
                start -= 1
            tails.append(ArmTail(arm, start, pattern))
            fixed.update(str(k) for k in parsed if k.scope == arm and k.block < start)
        fixed.update(str(k) for k in parsed if k.block is None or k.scope not in tail_arms)
        ids = set(fixed)
        for t in tails:
            ids.update(t.keys_at(t.start))
        return SectionRef(rho, min(ids), frozenset(fixed), tuple(tails))

    def section_of(self, rho: ExtRank, branch) -> SectionRef:
        """The concrete rho-section holding a branch (an instance when it lies in a family)."""
        for s in self.wsections(rho):
            if s.is_family:
                j = s.family.index_of(branch)
                if j is not None:
                    return s.family.instance(j)
            elif s.contains(branch):
                return s
        raise UnknownNode(f"branch {branch} lies in no rank-{rho} section")

    # ----------------------------------------------------------- incidence
    def _rank(self, x: WNodeRef) -> ExtRank:
        return self.g.rank_of(x)

    @staticmethod
    def _group(frame: Frame, x: WNodeRef) -> Set[WNodeRef]:
        c = frame.class_of(x)
        if c is None:
            raise UnknownNode(str(x))
        return {c} | frame.descendants(c)

    def incidence_keys(self, x: WNodeRef) -> FrozenSet[str]:
        """Branches reached from x through an embraced node or a collected tip."""
        frame = self.frame_for(x)
        group = self._group(frame, x)
        at_class: Dict[WNodeRef, Set[str]] = {}
        for e in frame.edges:
            if isinstance(e.step, BranchStep):
                k = branch_key(e.step.branch)
                at_class.setdefault(frame.cls[e.u], set()).add(k)
                at_class.setdefault(frame.cls[e.v], set()).add(k)
        keys: Set[str] = set()
        for c in group:
            keys.update(at_class.get(c, ()))
        for e in frame.edges:
            if isinstance(e.step, TipTraversal) and frame.cls[e.v] in group:
                keys.update(at_class.get(frame.cls[e.u], ()))
        return frozenset(keys)

    def _lower(self, x: WNodeRef) -> ExtRank:
        rank = self._rank(x)
        if rank is None:
            raise UnknownNode(str(x))
        if rank == FIN0 or rank.is_arrow:
            raise RankMismatch(f"{x} has rank {rank}; incidence needs a wnode of rank >= 1")
        return rank.pred()

    def incident_sections(self, x: WNodeRef) -> List[SectionRef]:
        lower = self._lower(x)
        found = {}
        for k in sorted(self.incidence_keys(x)):
            s = self.section_of(lower, k)
            found.setdefault(s.id, s)
        return [found[i] for i in sorted(found)]

    def incident(self, x: WNodeRef, s: SectionRef) -> bool:
        lower = self._lower(x)
        if s.rank != lower:
            raise RankMismatch(f"{x} has rank {self._rank(x)}; it meets sections of rank {lower}, not {s.rank}")
        return any(s.contains(k) for k in self.incidence_keys(x))

    def is_boundary(self, x: WNodeRef) -> bool:
        return len(self.incident_sections(x)) >= 2

    def wadjacent(self, x: WNodeRef, y: WNodeRef) -> bool:
        rx, ry = self._rank(x), self._rank(y)
        if rx != ry:
            raise RankMismatch(f"{x} has rank {rx}, {y} has rank {ry}")
        if x == y:
            return True
        ids_x = {s.id for s in self.incident_sections(x)}
        return any(s.id in ids_x for s in self.incident_sections(y))

    # ----------------------------------------------------------- periodic wnodes
    def rank_wnodes(self, rho: ExtRank, copy: Optional[int] = None) -> List[WNodeRef]:
        """rho-wnodes of the reference frame, optionally only those of one arm copy."""
        frame = self.frame()
        out = [a for a, r in frame.atom_rank.items() if r == rho and (copy is None or a.copy_index == copy)]
        return sorted(out, key=ref_key)

    def boundary_wnodes(self, s: SectionRef, copy: Optional[int] = None) -> List[WNodeRef]:
        """Boundary wnodes of the section's rank meeting s, read off the reference frame."""
        if s.rank == FIN0:
            return []
        return [w for w in self.rank_wnodes(s.rank, copy) if self.is_boundary(w) and self.carries(w, s)]

    def locally_rho_finite(self, s: SectionRef) -> bool:
        """False iff some infinite (rho-1)-section inside s meets boundary rho-wnodes in every copy."""
        rho = s.rank
        if rho.is_arrow:
            raise ArrowOmegaRank("local finiteness is not defined at rank warrow")
        if rho == FIN0:
            return True
        lower = rho.pred()
        ref = self.reference_copy
        periodic = [w for w in self.rank_wnodes(rho, ref) if self.is_boundary(w)]
        for t in self.wsections(lower):
            if not t.tails:
                continue
            if not any(s.contains(k) for k in t.sample_keys()):
                continue
            for w in periodic:
                if self.incident(w, t):
                    logger.info("section %s: %s meets infinitely many boundary %s-wnodes", s, t, rho)
                    return False
        return True

    def has_infinite_boundary(self, s: SectionRef) -> bool:
        """Some arm cell contributes a boundary wnode of rank s.rank to s in every copy."""
        return bool(self.boundary_wnodes(s, self.reference_copy))

    # ----------------------------------------------------------- walks
    def _entries(self, frame: Frame, x: WNodeRef, s: SectionRef, members: Set[WNodeRef]):
        """Classes of s that x reaches for free (embraced) or across one tip."""
        group = self._group(frame, x)
        out: Dict[WNodeRef, Tuple[Ordinal, TipTraversal, WNodeRef]] = {}
        for c in sorted(group & members, key=ref_key):
            out[c] = (ZERO, TipTraversal(MINUS_ONE), c)
        for e in frame.edges:
            if not isinstance(e.step, TipTraversal) or frame.cls[e.v] not in group:
                continue
            carrier = frame.cls[e.u]
            if carrier not in members:
                continue
            if e.u.is_ray and e.u.position != 0:
                continue
            w = tip_weight(e.step.rank)
            if carrier not in out or w < out[carrier][0]:
                out[carrier] = (w, e.step, e.u)
        return out

    def connecting_walk(self, x: WNodeRef, y: WNodeRef, s: SectionRef) -> WalkSpec:
        """Walk inside s from x to y, entering and leaving through embraced nodes or tips."""
        if not (self.incident(x, s) and self.incident(y, s)):
            raise NotIncident(f"{x} and {y} are not both incident to section {s}")
        if x == y:
            return WalkSpec.trivial(x)
        frame = self.frame_for(x, y)
        adj: Dict[WNodeRef, List[Tuple[WNodeRef, BranchStep]]] = {}
        for e in frame.edges:
            if isinstance(e.step, BranchStep) and s.contains(e.step.branch):
                cu, cv = frame.cls[e.u], frame.cls[e.v]
                adj.setdefault(cu, []).append((cv, e.step))
                adj.setdefault(cv, []).append((cu, e.step))
        members = set(adj)
        starts = self._entries(frame, x, s, members)
        ends = self._entries(frame, y, s, members)
        if not starts or not ends:
            raise NotIncident(f"no entry into section {s} inside the checked frame")

        dist: Dict[WNodeRef, Ordinal] = {}
        back: Dict[WNodeRef, Tuple[Optional[WNodeRef], Optional[BranchStep]]] = {}
        heap = []
        for c, (w, _, _) in starts.items():
            dist[c] = w
            back[c] = (None, None)
            heapq.heappush(heap, (w, ref_key(c), c))
        done = set()
        while heap:
            d, _, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            for v, step in sorted(adj.get(u, ()), key=lambda t: (ref_key(t[0]), t[1].branch)):
                nd = nat_sum(d, Ordinal.finite(1))
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    back[v] = (u, step)
                    heapq.heappush(heap, (nd, ref_key(v), v))
        best = None
        for c, (w, _, _) in ends.items():
            if c in dist:
                total = nat_sum(dist[c], w)
                if best is None or (total, ref_key(c)) < (best[0], ref_key(best[1])):
                    best = (total, c)
        if best is None:
            raise NotIncident(f"{x} and {y} are not joined inside section {s}")

        path = []
        c = best[1]
        while c is not None:
            prev, step = back[c]
            path.append((c, step))
            c = prev
        path.reverse()
        first, last = path[0][0], path[-1][0]
        nodes: List[WNodeRef] = [x]
        steps = []
        if frame.cls.get(x) != first:
            _, enter, enter_at = starts[first]
            steps.append(enter)
            nodes.append(enter_at)
        for c, step in path[1:]:
            steps.append(step)
            nodes.append(c)
        if frame.cls.get(y) == last:
            if len(nodes) > 1:
                nodes[-1] = y
            else:
                steps.append(TipTraversal(MINUS_ONE))
                nodes.append(y)
        else:
            _, leave, leave_at = ends[last]
            if len(nodes) > 1:
                nodes[-1] = leave_at
            elif leave_at != x:
                steps.append(TipTraversal(MINUS_ONE))
                nodes.append(leave_at)
            steps.append(leave)
            nodes.append(y)
        walk = WalkSpec(tuple(nodes), tuple(steps))
        logger.debug("connecting walk in %s: %s", s, walk)
        return walk

    # ----------------------------------------------------------- escape walks
    def _boundary_in(self, s: SectionRef, copy: int) -> List[WNodeRef]:
        return [w for w in self.rank_wnodes(s.rank, copy) if self.is_boundary(w) and self.carries(w, s)]

    def _candidates(self, s: SectionRef, cap: int) -> Iterator[WNodeRef]:
        """Boundary wnodes of s: core first, then copy by copy up to `cap`."""
        ref = self.reference_copy
        yield from (w for w in self._boundary_in(s, -1) if w.block is None)
        periodic = sorted(((w.scope, w.local) for w in self._boundary_in(s, ref)))
        for c in range(cap + 1):
            if c < ref:
                yield from self._boundary_in(s, c)
            else:
                for arm, local in periodic:
                    yield WNodeRef.arm(arm, c, local)

    def escape_walk(self, s: SectionRef, x0: WNodeRef, count: int) -> List[Tuple[WNodeRef, Ordinal]]:
        """`count` boundary wnodes of s with d(x0, x_k) >= w^rho * k, picked greedily outwards."""
        if count == 0:
            return []
        rho = s.rank
        if not self.locally_rho_finite(s):
            raise HypothesisViolated(f"section {s} is not locally {rho}-finite")
        if not self.has_infinite_boundary(s):
            raise HypothesisViolated(f"section {s} has finitely many boundary {rho}-wnodes")
        if self._rank(x0) != rho:
            raise HypothesisViolated(f"{x0} has rank {self._rank(x0)}, expected {rho}")
        unit = omega_pow(rho)
        cap = self.reference_copy + ESCAPE_SPAN * (count + 1)
        candidates = self._candidates(s, cap)
        picks: List[Tuple[WNodeRef, Ordinal]] = []
        for k in range(1, count + 1):
            target = nat_mul(unit, k)
            for w in candidates:
                if w == x0:
                    continue
                d = wdistance(self.g, x0, w)
                if compare(d, target) != Cmp.LT:
                    picks.append((w, d))
                    logger.debug("escape step %d: %s at %s >= %s", k, w, d, target)
                    break
            else:
                raise HypothesisViolated(f"no boundary wnode at distance >= {target} within {cap + 1} copies")
        return picks

    # ----------------------------------------------------------- adjacency
    def adjacency_check(self, rho: ExtRank) -> Dict:
        """Non-wadjacent boundary pairs and section crossings of the reference frame, against w^rho."""
        self._check_rank(rho)
        if rho == FIN0 or rho.is_arrow:
            raise RankMismatch(f"adjacency is checked for ranks >= 1 other than warrow, got {rho}")
        unit = omega_pow(rho)
        bound = [w for w in self.rank_wnodes(rho) if w.copy_index <= self.reference_copy and self.is_boundary(w)]
        pairs, failures = 0, []
        for i, x in enumerate(bound):
            for y in bound[i + 1:]:
                if self.wadjacent(x, y):
                    continue
                pairs += 1
                d = wdistance(self.g, x, y)
                if compare(d, unit) == Cmp.LT:
                    failures.append({"kind": "distance", "x": str(x), "y": str(y), "distance": str(d)})
        crossings = 0
        for w in bound:
            frame = self.frame_for(w)
            costs = []
            for t in self.incident_sections(w):
                members = {frame.cls[a] for e in frame.edges if isinstance(e.step, BranchStep)
                           and t.contains(e.step.branch) for a in (e.u, e.v)}
                entries = self._entries(frame, w, t, members)
                if entries:
                    costs.append((min(v[0] for v in entries.values()), t))
            for i, (ca, ta) in enumerate(costs):
                for cb, tb in costs[i + 1:]:
                    crossings += 1
                    total = nat_sum(ca, cb)
                    if compare(total, unit) == Cmp.LT:
                        failures.append({"kind": "crossing", "x": str(w), "from": ta.id, "to": tb.id,
                                         "length": str(total)})
        logger.info("adjacency at rank %s: %d pair(s), %d crossing(s), %d failure(s)",
                    rho, pairs, crossings, len(failures))
        return {
            "rank": rho.to_json(),
            "boundary_wnodes": [str(w) for w in bound],
            "pairs_checked": pairs,
            "crossings_checked": crossings,
            "failures": failures,
            "ok": not failures,
        }


def escape_presentation(g: WGraphPresentation, picks) -> ArmIndexed:
    """Arm-indexed sequence n -> arm[b + a*n].local through the trailing picks of an escape walk."""
    nodes = [w for w, _ in picks]
    tail = []
    for w in reversed(nodes):
        if w.block is None or (tail and (w.scope, w.local, w.position) != (tail[0].scope, tail[0].local, tail[0].position)):
            break
        tail.insert(0, w)
    if len(tail) < 2:
        raise FitFailure("an escape presentation needs two picks in one arm cell position")
    a = tail[1].block - tail[0].block
    if a < 1 or any(v.block - u.block != a for u, v in zip(tail, tail[1:])):
        raise FitFailure(f"copies {[w.block for w in tail]} are not an arithmetic progression")
    head = tail[0]
    p = ArmIndexed(head.scope, IndexMap.affine(a, head.block), head.cell_local)
    g.resolve(p.node_at(0))
    return p


# ---------------------------------------------------------------- functions

def _engine(g: WGraphPresentation) -> SectionEngine:
    return SectionEngine.of(g)


def wsections(g: WGraphPresentation, rho: ExtRank) -> List[SectionRef]:
    return _engine(g).wsections(rho)


def section_of(g: WGraphPresentation, rho: ExtRank, branch) -> SectionRef:
    return _engine(g).section_of(rho, branch)


def incident(g: WGraphPresentation, x, s: SectionRef) -> bool:
    return _engine(g).incident(g.resolve(x), s)


def incident_sections(g: WGraphPresentation, x) -> List[SectionRef]:
    return _engine(g).incident_sections(g.resolve(x))


def connecting_walk(g: WGraphPresentation, x, y, s: SectionRef) -> WalkSpec:
    return _engine(g).connecting_walk(g.resolve(x), g.resolve(y), s)


def wadjacent(g: WGraphPresentation, x, y) -> bool:
    return _engine(g).wadjacent(g.resolve(x), g.resolve(y))


def is_boundary(g: WGraphPresentation, x) -> bool:
    return _engine(g).is_boundary(g.resolve(x))


def boundary_wnodes(g: WGraphPresentation, s: SectionRef, copy: Optional[int] = None) -> List[WNodeRef]:
    return _engine(g).boundary_wnodes(s, copy)


def locally_rho_finite(g: WGraphPresentation, s: SectionRef) -> bool:
    return _engine(g).locally_rho_finite(s)


def has_infinite_boundary(g: WGraphPresentation, s: SectionRef) -> bool:
    return _engine(g).has_infinite_boundary(s)


def escape_walk(g: WGraphPresentation, s: SectionRef, x0, count: int) -> List[Tuple[WNodeRef, Ordinal]]:
    return _engine(g).escape_walk(s, g.resolve(x0), count)


def adjacency_check(g: WGraphPresentation, rho: ExtRank) -> Dict:
    return _engine(g).adjacency_check(rho)
