"""
Materialising a presentation.

A Frame is a finite piece of the wgraph: the core, arm copies 0..depth-1 and the
arm apexes. Explicit frames cut every ray at a position limit and keep all its
positions; skeleton frames keep a ray only at the positions something refers
to and join those by weighted segments. Atoms identified by same-rank gluing
form identity classes; a class embraced (transitively) by a higher class is
merged into its top embracer when distances are measured.
"""
import threading
from typing import Dict, Iterable, List, NamedTuple, Optional, Set, Tuple

import networkx as nx
from networkx.utils import UnionFind

from tgalaxy.core.config import settings
from tgalaxy.core.errors import InvalidDepth, UnknownNode
from tgalaxy.core.utils import get_logger
from tgalaxy.ordinal.arith import ExtRank, ONE, Ordinal
from tgalaxy.wgraph.presentation import Block, WGraphPresentation
from tgalaxy.wgraph.refs import WNodeRef, branch_id, ray_branch_id, split_local
from tgalaxy.wgraph.steps import BranchStep, RaySegment, Step, TipTraversal, tip_weight

logger = get_logger("wgraph")

FIN0 = ExtRank.fin(0)


def ref_key(ref: WNodeRef):
    """Canonical order: core and apex nodes first, then by copy index."""
    return (ref.copy_index, ref.scope, ref.block is not None, ref.local, -1 if ref.position is None else ref.position)


class Edge(NamedTuple):
    u: WNodeRef
    v: WNodeRef
    weight: Ordinal
    step: Step


class _BlockInfo:
    """Per-declaration facts shared by every copy of a block."""

    def __init__(self, block: Block):
        self.block = block
        self.ranks: Dict[str, ExtRank] = {n: FIN0 for n in block.nodes}
        self.ranks.update({w.id: w.rank for w in block.wnodes})
        self.rays: List[str] = [r.id for r in block.rays]
        self.keys: Dict[str, Set[int]] = {r: {0} for r in self.rays}
        self.embraces: List[Tuple[str, str]] = []
        self.ray_tips: Dict[str, List[Tuple[str, ExtRank]]] = {r: [] for r in self.rays}

        referenced = [u for br in block.branches for u in br] + list(block.ports.values())
        for w in block.wnodes:
            for e in w.embraces:
                self.embraces.append((w.id, e))
                referenced.append(e)
            for t in w.tips:
                if t.node is not None:
                    self.embraces.append((w.id, t.node))
                    referenced.append(t.node)
                elif t.ray is not None and t.ray in self.ray_tips:
                    self.ray_tips[t.ray].append((w.id, t.rank))
        for local in referenced:
            name, pos = split_local(local)
            if pos is not None and name in self.keys:
                self.keys[name].add(pos)
        self.sorted_keys = {r: sorted(ks) for r, ks in self.keys.items()}

    def rank(self, local: str) -> Optional[ExtRank]:
        name, pos = split_local(local)
        if pos is not None:
            return FIN0 if name in self.keys else None
        return self.ranks.get(local)


class Frame:
    def __init__(self, cg: "CompiledGraph", depth: int, *, ray_limit: Optional[int] = None,
                 rank_cap: Optional[ExtRank] = None):
        self.cg = cg
        self.depth = depth
        self.ray_limit = ray_limit
        self.rank_cap = rank_cap
        self.atom_rank: Dict[WNodeRef, ExtRank] = {}
        self.ray_atoms: Dict[Tuple[str, Optional[int], str], List[WNodeRef]] = {}
        self.edges: List[Edge] = []
        self.multi_parents: Dict[WNodeRef, List[WNodeRef]] = {}
        self._build()

    # ------------------------------------------------------------ building
    def _visible(self, rank: ExtRank) -> bool:
        return self.rank_cap is None or rank <= self.rank_cap

    def _instances(self):
        yield "", None, self.cg.infos[""]
        for arm in self.cg.g.arms:
            for i in range(self.depth):
                yield arm.id, i, self.cg.infos[arm.id]

    def _ref(self, scope: str, block: Optional[int], local: str) -> WNodeRef:
        name, pos = split_local(local)
        return WNodeRef(scope, block, name, pos)

    def _positions(self, info: _BlockInfo, ray: str) -> List[int]:
        if self.ray_limit is None:
            return info.sorted_keys[ray]
        return list(range(max(self.ray_limit, info.sorted_keys[ray][-1]) + 1))

    def _build(self):
        links: List[Tuple[WNodeRef, WNodeRef]] = []
        for scope, block, info in self._instances():
            prefix = WNodeRef(scope, block).prefix
            for local, rank in info.ranks.items():
                if self._visible(rank):
                    self.atom_rank[WNodeRef(scope, block, local)] = rank
            for ray in info.rays:
                positions = self._positions(info, ray)
                atoms = [WNodeRef(scope, block, ray, j) for j in positions]
                self.ray_atoms[(scope, block, ray)] = atoms
                for a in atoms:
                    self.atom_rank[a] = FIN0
                for a, b in zip(atoms, atoms[1:]):
                    if self.ray_limit is None:
                        step = RaySegment(f"{prefix}{ray}", a.position, b.position)
                        self.edges.append(Edge(a, b, Ordinal.finite(b.position - a.position), step))
                    else:
                        self.edges.append(Edge(a, b, ONE, BranchStep(ray_branch_id(prefix, ray, a.position))))
                for collector, tip_rank in info.ray_tips[ray]:
                    w = WNodeRef(scope, block, collector)
                    if w in self.atom_rank:
                        step = TipTraversal(tip_rank, f"{prefix}{ray}")
                        self.edges.extend(Edge(a, w, tip_weight(tip_rank), step) for a in atoms)
            for u, v in info.block.branches:
                ru, rv = self._ref(scope, block, u), self._ref(scope, block, v)
                self.edges.append(Edge(ru, rv, ONE, BranchStep(branch_id(prefix, u, v))))
            for upper, lower in info.embraces:
                links.append((WNodeRef(scope, block, upper), self._ref(scope, block, lower)))

        g = self.cg.g
        for arm in g.arms:
            cell = arm.cell
            for i in range(self.depth - 1):
                for right, left in arm.gluing.items():
                    a = self._ref(arm.id, i, cell.ports[right])
                    b = self._ref(arm.id, i + 1, cell.ports[left])
                    links.append(self._orient(a, b))
            if self.depth > 0:
                for left, core_port in arm.attach.items():
                    a = self._ref(arm.id, 0, cell.ports[left])
                    b = self._ref("", None, g.core.ports[core_port])
                    links.append(self._orient(a, b))
            if arm.apex is not None and self._visible(arm.apex.rank):
                apex = WNodeRef.apex(arm.id, arm.apex.id)
                self.atom_rank[apex] = arm.apex.rank
                for t in arm.apex.tips:
                    if t.arm is None:
                        continue
                    step = TipTraversal(t.rank, t.arm)
                    for atom, rank in list(self.atom_rank.items()):
                        if atom.scope == t.arm and atom.block is not None and self._carries(rank, t.rank):
                            self.edges.append(Edge(atom, apex, tip_weight(t.rank), step))

        self.edges = [e for e in self.edges if e.u in self.atom_rank and e.v in self.atom_rank]
        self._classify(links)

    @staticmethod
    def _carries(atom_rank: ExtRank, tip_rank: ExtRank) -> bool:
        if tip_rank.is_arrow:
            return atom_rank.is_finite
        return atom_rank <= tip_rank

    def _orient(self, a: WNodeRef, b: WNodeRef):
        ra, rb = self.cg.g.rank_of(a), self.cg.g.rank_of(b)
        if ra == rb:
            return a, b, True
        return (a, b, False) if ra > rb else (b, a, False)

    def _classify(self, links):
        uf = UnionFind(self.atom_rank)
        embraces = []
        for link in links:
            if len(link) == 3 and link[2]:
                a, b = link[0], link[1]
                if a in self.atom_rank and b in self.atom_rank:
                    uf.union(a, b)
            else:
                upper, lower = link[0], link[1]
                if upper in self.atom_rank and lower in self.atom_rank:
                    embraces.append((upper, lower))
        self.members: Dict[WNodeRef, List[WNodeRef]] = {}
        for group in uf.to_sets():
            ordered = sorted(group, key=ref_key)
            self.members[ordered[0]] = ordered
        self.cls: Dict[WNodeRef, WNodeRef] = {a: c for c, ms in self.members.items() for a in ms}
        self.rank: Dict[WNodeRef, ExtRank] = {c: self.atom_rank[c] for c in self.members}

        parents: Dict[WNodeRef, Set[WNodeRef]] = {}
        for upper, lower in embraces:
            cu, cl = self.cls[upper], self.cls[lower]
            if cu != cl:
                parents.setdefault(cl, set()).add(cu)
        self.parent: Dict[WNodeRef, WNodeRef] = {}
        for child, ups in parents.items():
            ordered = sorted(ups, key=lambda c: (-self.rank[c].tier, -self.rank[c].k, ref_key(c)))
            self.parent[child] = ordered[0]
            if len(ordered) > 1:
                self.multi_parents[child] = ordered
        self._top: Dict[WNodeRef, WNodeRef] = {}

    # ------------------------------------------------------------- queries
    def class_of(self, ref: WNodeRef) -> Optional[WNodeRef]:
        return self.cls.get(ref)

    def top_of(self, c: WNodeRef) -> WNodeRef:
        """Maximal class embracing `c` (itself when nothing does)."""
        if c in self._top:
            return self._top[c]
        seen = [c]
        cur = c
        while cur in self.parent and self.parent[cur] not in seen:
            cur = self.parent[cur]
            seen.append(cur)
        for s in seen:
            self._top[s] = cur
        return cur

    def descendants(self, c: WNodeRef) -> Set[WNodeRef]:
        return nx.descendants(self.embrace_digraph(), c) if c in self.embrace_digraph() else set()

    def embrace_digraph(self) -> nx.DiGraph:
        if not hasattr(self, "_embrace_dg"):
            dg = nx.DiGraph()
            dg.add_nodes_from(self.members)
            for child, ups in self.multi_parents.items():
                dg.add_edges_from((u, child) for u in ups)
            dg.add_edges_from((p, c) for c, p in self.parent.items())
            self._embrace_dg = dg
        return self._embrace_dg

    def virtual_edges(self, ref: WNodeRef) -> List[Edge]:
        """Edges of a ray position a skeleton frame does not keep."""
        if not ref.is_ray or ref in self.atom_rank:
            return []
        atoms = self.ray_atoms.get((ref.scope, ref.block, ref.local))
        if atoms is None:
            raise UnknownNode(str(ref))
        prefix = ref.prefix
        info = self.cg.infos[ref.scope]
        out: List[Edge] = []
        below = [a for a in atoms if a.position < ref.position]
        above = [a for a in atoms if a.position > ref.position]
        ray = f"{prefix}{ref.local}"
        if below:
            p = below[-1]
            out.append(Edge(p, ref, Ordinal.finite(ref.position - p.position), RaySegment(ray, p.position, ref.position)))
        if above:
            q = above[0]
            out.append(Edge(ref, q, Ordinal.finite(q.position - ref.position), RaySegment(ray, ref.position, q.position)))
        for collector, tip_rank in info.ray_tips[ref.local]:
            w = WNodeRef(ref.scope, ref.block, collector)
            if w in self.atom_rank:
                out.append(Edge(ref, w, tip_weight(tip_rank), TipTraversal(tip_rank, ray)))
        if ref.block is not None:
            arm = self.cg.g.arm(ref.scope)
            if arm.apex is not None:
                apex = WNodeRef.apex(arm.id, arm.apex.id)
                for t in arm.apex.tips:
                    if t.arm == arm.id and apex in self.atom_rank and self._carries(FIN0, t.rank):
                        out.append(Edge(ref, apex, tip_weight(t.rank), TipTraversal(t.rank, t.arm)))
        return out

    def supernode_min_copy(self) -> Dict[WNodeRef, int]:
        """Least copy index among the atoms merged into each super-node."""
        if not hasattr(self, "_min_copy"):
            out: Dict[WNodeRef, int] = {}
            for atom in self.atom_rank:
                s = self.top_of(self.cls[atom])
                out[s] = min(out.get(s, atom.copy_index), atom.copy_index)
            self._min_copy = out
        return self._min_copy

    def supernode_of(self, ref: WNodeRef) -> Optional[WNodeRef]:
        c = self.cls.get(ref)
        return None if c is None else self.top_of(c)

    def supernode_adjacency(self):
        """Least edge between every two adjacent super-nodes, both directions."""
        if hasattr(self, "_adjacency"):
            return self._adjacency
        adj: Dict[WNodeRef, Dict[WNodeRef, Edge]] = {self.top_of(c): {} for c in self.members}
        for e in self.edges:
            su, sv = self.top_of(self.cls[e.u]), self.top_of(self.cls[e.v])
            if su == sv:
                continue
            for a, b, edge in ((su, sv, e), (sv, su, Edge(e.v, e.u, e.weight, flip_step(e.step)))):
                best = adj[a].get(b)
                if best is None or edge_order(edge) < edge_order(best):
                    adj[a][b] = edge
        self._adjacency = adj
        return adj


def flip_step(step: Step) -> Step:
    if isinstance(step, RaySegment):
        return RaySegment(step.ray, step.end, step.start)
    return step


def edge_order(e: Edge):
    return e.weight, str(e.step), ref_key(e.u), ref_key(e.v)


class CompiledGraph:
    """Block facts plus caches of frames; results never depend on what is cached."""

    def __init__(self, g: WGraphPresentation):
        self.g = g
        self.infos: Dict[str, _BlockInfo] = {"": _BlockInfo(g.core)}
        for arm in g.arms:
            self.infos[arm.id] = _BlockInfo(arm.cell)
        self._frames: Dict[tuple, Frame] = {}
        self._lock = threading.Lock()
        self.distance_memo: Dict[tuple, Ordinal] = {}
        self.memo_lock = threading.Lock()
        # per-graph engines of the analysis packages (sections, ...)
        self.extras: Dict[str, object] = {}

    def frame(self, depth: int, *, ray_limit: Optional[int] = None, rank_cap: Optional[ExtRank] = None) -> Frame:
        if not self.g.arms:
            depth = 1
        key = (depth, ray_limit, rank_cap)
        with self._lock:
            cached = self._frames.get(key)
        if cached is not None:
            return cached
        logger.debug("materialising depth=%d ray_limit=%s rank_cap=%s", depth, ray_limit, rank_cap)
        frame = Frame(self, depth, ray_limit=ray_limit, rank_cap=rank_cap)
        with self._lock:
            self._frames.setdefault(key, frame)
        return frame


class UnrolledGraph:
    """Explicit finite wgraph: identity classes joined by branch and tip edges."""

    def __init__(self, frame: Frame):
        self.frame = frame
        self.depth = frame.depth
        self.graph = nx.MultiGraph()
        for c, ms in frame.members.items():
            self.graph.add_node(c, rank=frame.rank[c], members=tuple(ms))
        self.branches: Dict[str, Tuple[WNodeRef, WNodeRef]] = {}
        for e in frame.edges:
            cu, cv = frame.cls[e.u], frame.cls[e.v]
            if isinstance(e.step, BranchStep):
                self.branches[e.step.branch] = (cu, cv)
                self.graph.add_edge(cu, cv, key=e.step.branch, kind="branch", weight=e.weight, step=e.step)
            elif cu != cv:
                self.graph.add_edge(cu, cv, key=f"{e.step}{e.u}", kind="tip", weight=e.weight, step=e.step)
        self.embrace = frame.embrace_digraph()

    @property
    def nodes(self) -> List[WNodeRef]:
        return sorted(self.graph.nodes, key=ref_key)

    def is_subgraph_of(self, other: "UnrolledGraph") -> bool:
        return set(self.graph.nodes) <= set(other.graph.nodes) and set(self.branches) <= set(other.branches)

    def wconnected(self) -> bool:
        g = nx.Graph()
        g.add_nodes_from(self.graph.nodes)
        g.add_edges_from((u, v) for u, v in self.graph.edges())
        g.add_edges_from(self.embrace.edges())
        return g.number_of_nodes() <= 1 or nx.is_connected(g)

    def to_json(self):
        tips = sorted(
            {(str(u), str(v), str(d["step"].rank), d["step"].source)
             for u, v, d in self.graph.edges(data=True) if d["kind"] == "tip"}
        )
        return {
            "depth": self.depth,
            "nodes": [{"id": str(c), "rank": self.frame.rank[c].to_json(),
                       "aliases": [str(m) for m in self.frame.members[c][1:]]} for c in self.nodes],
            "branches": [{"id": b, "ends": [str(u), str(v)]} for b, (u, v) in sorted(self.branches.items())],
            "tips": [{"from": u, "to": v, "rank": r, "source": s} for u, v, r, s in tips],
            "embraces": sorted([str(u), str(v)] for u, v in self.embrace.edges()),
        }


def unroll(g: WGraphPresentation, depth: int, *, ray_unit: Optional[int] = None) -> UnrolledGraph:
    """Arms materialised for copies < depth, rays cut at position depth*L."""
    if depth < 1:
        raise InvalidDepth(f"unroll depth must be >= 1, got {depth}")
    unit = ray_unit or settings.RAY_UNIT
    return UnrolledGraph(g.compiled().frame(depth, ray_limit=depth * unit))


def frame_depth_for(*refs: WNodeRef, extra: int = 2) -> int:
    return max([r.copy_index for r in refs] + [0]) + extra


def is_maximal(g: WGraphPresentation, x) -> bool:
    """True iff no wnode embraces x, directly or through arm gluing."""
    x = g.resolve(x)
    frame = g.compiled().frame(frame_depth_for(x))
    c = frame.class_of(x)
    if c is None:
        # ray positions nobody refers to are never embraced
        return True
    return frame.top_of(c) == c


def iter_atoms(frame: Frame, scope: str = None) -> Iterable[WNodeRef]:
    for atom in sorted(frame.atom_rank, key=ref_key):
        if scope is None or atom.scope == scope:
            yield atom
