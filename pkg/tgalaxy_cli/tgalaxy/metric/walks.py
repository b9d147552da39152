"""
Two-ended walks: the alternating node/step record and its ordinal length.
"""
from dataclasses import dataclass
from typing import List, Tuple

from tgalaxy.core.errors import InvalidWalk
from tgalaxy.ordinal.arith import ZERO, Ordinal, nat_sum
from tgalaxy.wgraph.presentation import WGraphPresentation
from tgalaxy.wgraph.refs import WNodeRef, parse_branch_id, parse_ref
from tgalaxy.wgraph.steps import BranchStep, RaySegment, Step, TipTraversal, step_weight
from tgalaxy.wgraph.unroll import frame_depth_for


@dataclass(frozen=True)
class WalkSpec:
    nodes: Tuple[WNodeRef, ...]
    steps: Tuple[Step, ...] = ()

    @property
    def endpoints(self) -> Tuple[WNodeRef, WNodeRef]:
        if not self.nodes:
            raise InvalidWalk("a walk has at least one node")
        return self.nodes[0], self.nodes[-1]

    @classmethod
    def trivial(cls, x: WNodeRef) -> "WalkSpec":
        return cls((x,), ())

    def reversed(self) -> "WalkSpec":
        steps = []
        for s in reversed(self.steps):
            steps.append(RaySegment(s.ray, s.end, s.start) if isinstance(s, RaySegment) else s)
        return WalkSpec(tuple(reversed(self.nodes)), tuple(steps))

    def to_json(self):
        return {
            "nodes": [str(n) for n in self.nodes],
            "steps": [str(s) for s in self.steps],
            "length": str(walk_length(self)),
        }

    def __str__(self):
        parts = [str(self.nodes[0])] if self.nodes else []
        for s, n in zip(self.steps, self.nodes[1:]):
            parts.append(f"{s} {n}")
        return " ".join(parts)


def _check_shape(w: WalkSpec):
    if not w.nodes:
        raise InvalidWalk("a walk has at least one node")
    if len(w.nodes) != len(w.steps) + 1:
        raise InvalidWalk(f"{len(w.nodes)} nodes cannot alternate with {len(w.steps)} steps")
    for s in w.steps:
        if not isinstance(s, (BranchStep, RaySegment, TipTraversal)):
            raise InvalidWalk(f"not a walk step: {s!r}")
        if isinstance(s, TipTraversal) and s.rank.is_omega:
            raise InvalidWalk("no omega-tips below rank omega+1")


def walk_length(w: WalkSpec) -> Ordinal:
    """Natural sum of step contributions: 1 per branch, w^(a+1) per a-tip, 0 per (-1)-tip."""
    _check_shape(w)
    total = ZERO
    for s in w.steps:
        total = nat_sum(total, step_weight(s))
    return total


def validate_walk(g: WGraphPresentation, w: WalkSpec) -> WalkSpec:
    """Check that consecutive nodes are incident through each step; raises InvalidWalk."""
    _check_shape(w)
    nodes = [g.resolve(n) for n in w.nodes]
    ray_reach = max([n.position or 0 for n in nodes]
                    + [max(s.start, s.end) for s in w.steps if isinstance(s, RaySegment)] + [1])
    frame = g.compiled().frame(frame_depth_for(*nodes), ray_limit=ray_reach + 1)

    def top(ref: WNodeRef):
        s = frame.supernode_of(ref)
        if s is None:
            raise InvalidWalk(f"{ref} is outside the checked frame")
        return s

    by_branch = {}
    tips: List = []
    for e in frame.edges:
        if isinstance(e.step, BranchStep):
            by_branch[e.step.branch] = (e.u, e.v)
        elif isinstance(e.step, TipTraversal):
            tips.append(e)

    for i, (s, u, v) in enumerate(zip(w.steps, nodes, nodes[1:])):
        tu, tv = top(u), top(v)
        if isinstance(s, BranchStep):
            ends = by_branch.get(s.branch)
            if ends is None:
                parse_branch_id(s.branch)
                raise InvalidWalk(f"step {i}: unknown branch {s.branch}")
            ea, eb = top(ends[0]), top(ends[1])
            ok = {ea, eb} == {tu, tv}
        elif isinstance(s, RaySegment):
            base = parse_ref(f"{s.ray}@0")
            a, b = base.with_position(s.start), base.with_position(s.end)
            ok = (top(a), top(b)) == (tu, tv)
        elif s.rank.is_minus_one:
            ok = tu == tv or any(
                e.step.rank == s.rank and {top(e.u), top(e.v)} == {tu, tv} for e in tips
            )
        else:
            ok = any(e.step.rank == s.rank and {top(e.u), top(e.v)} == {tu, tv} for e in tips)
        if not ok:
            raise InvalidWalk(f"step {i} ({s}) does not join {u} and {v}")
    return w
