"""
Structural checks on a presentation. Violations are returned as data; only
`ensure_valid` raises.
"""
from dataclasses import dataclass
from typing import List

import networkx as nx

from tgalaxy.core.errors import InvalidPresentation, TGalaxyError
from tgalaxy.core.utils import get_logger
from tgalaxy.ordinal.arith import ExtRank
from tgalaxy.wgraph.presentation import Block, WGraphPresentation, WNodeDecl

logger = get_logger("wgraph")

VALIDATION_DEPTH = 3


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    message: str = ""

    def __str__(self):
        return f"{self.kind}({self.where})" + (f": {self.message}" if self.message else "")

    def to_json(self):
        return {"kind": self.kind, "where": self.where, "message": self.message}


def _declared(block: Block, local: str) -> bool:
    return block.rank_of(local) is not None


def _required_tip_rank(rank: ExtRank):
    """Rank of the tip a wnode of `rank` must collect; None when any tip will do."""
    if rank.is_arrow:
        return None
    return rank.pred()


def _check_wnode(w: WNodeDecl, block: Block, where: str, nu: ExtRank, *, apex_of: str = None) -> List[Violation]:
    out = []
    if w.rank > nu:
        out.append(Violation("RankAboveGraph", where, f"rank {w.rank} exceeds graph rank {nu}"))
    if w.rank == ExtRank.fin(0):
        out.append(Violation("WNodeRank", where, "declared wnodes have rank >= 1; 0-nodes go in `nodes`"))
        return out
    for e in w.embraces:
        r = block.rank_of(e) if apex_of is None else None
        if r is None:
            out.append(Violation("UnknownId", where, f"embraced id {e!r} is not declared in this block"))
        elif not r < w.rank:
            out.append(Violation("EmbraceRankViolation", where, f"embraced {e!r} has rank {r} >= {w.rank}"))
    for t in w.tips:
        if not t.rank < w.rank:
            out.append(Violation("TipRankViolation", where, f"tip rank {t.rank} is not below {w.rank}"))
        if t.arm is not None:
            if apex_of is None:
                out.append(Violation("ArmTipOutsideApex", where, "only an arm apex collects the arm's tip"))
            elif t.arm != apex_of:
                out.append(Violation("ApexTip", where, f"apex collects the tip of arm {t.arm!r}, not its own"))
        elif apex_of is not None:
            out.append(Violation("ApexTip", where, "an apex collects arm tips only"))
        elif t.ray is not None and not any(r.id == t.ray for r in block.rays):
            out.append(Violation("UnknownId", where, f"tip ray {t.ray!r} is not declared"))
        elif t.node is not None and block.rank_of(t.node) is None:
            out.append(Violation("UnknownId", where, f"tip node {t.node!r} is not declared"))
    needed = _required_tip_rank(w.rank)
    if needed is None:
        if not any(not t.rank.is_minus_one for t in w.tips):
            out.append(Violation("MissingTip", where, "a warrow-wnode collects at least one tip"))
    elif not any(t.rank == needed for t in w.tips):
        out.append(Violation("MissingTip", where, f"no tip of rank {needed}"))
    return out


def _check_block(block: Block, label: str, nu: ExtRank) -> List[Violation]:
    out = []
    ids = list(block.nodes) + [r.id for r in block.rays] + [w.id for w in block.wnodes]
    for dup in sorted({i for i in ids if ids.count(i) > 1}):
        out.append(Violation("DuplicateId", f"{label}:{dup}"))
    for u, v in block.branches:
        where = f"{label}:{u}~{v}"
        if u == v:
            out.append(Violation("BranchNotTwoElement", where))
            continue
        for end in (u, v):
            r = block.rank_of(end)
            if r is None:
                out.append(Violation("UnknownId", where, f"endpoint {end!r} is not declared"))
            elif r != ExtRank.fin(0):
                out.append(Violation("BranchEndpointRank", where, f"endpoint {end!r} is a {r}-wnode"))
    for port, local in sorted(block.ports.items()):
        if not _declared(block, local):
            out.append(Violation("PortUnknown", f"{label}:{port}", f"port target {local!r} is not declared"))
    for w in block.wnodes:
        out.extend(_check_wnode(w, block, f"{label}:{w.id}", nu))
    return out


def _check_arm(g: WGraphPresentation, arm) -> List[Violation]:
    label = f"arm {arm.id}"
    out = _check_block(arm.cell, label, g.rank)
    ports = arm.cell.ports
    for right, left in sorted(arm.gluing.items()):
        for p in (right, left):
            if p not in ports:
                out.append(Violation("PortUnknown", f"{label}:{p}", "gluing names an undeclared port"))
    targets = list(arm.gluing.values())
    if len(set(targets)) != len(targets):
        out.append(Violation("GluingNotBijection", label, "two right ports glue to one left port"))
    sources = {ports.get(p) for p in arm.gluing}
    sinks = {ports.get(p) for p in targets}
    if sources & sinks - {None}:
        out.append(Violation("GluingChain", label, "a node is both a right and a left port"))
    for left, core_port in sorted(arm.attach.items()):
        if left not in ports:
            out.append(Violation("PortUnknown", f"{label}:{left}", "attachment names an undeclared cell port"))
        if core_port not in g.core.ports:
            out.append(Violation("PortUnknown", f"core:{core_port}", f"arm {arm.id} attaches to an undeclared core port"))
    if arm.apex is not None:
        out.extend(_check_wnode(arm.apex, arm.cell, f"{label}:{arm.apex.id}", g.rank, apex_of=arm.id))
        if any(w.id == arm.apex.id for w in arm.cell.wnodes):
            out.append(Violation("DuplicateId", f"{label}:{arm.apex.id}", "apex id repeats a cell id"))
    return out


def _check_aliases(g: WGraphPresentation) -> List[Violation]:
    out = []
    for name, target in sorted(g.aliases.items()):
        try:
            g.resolve(target)
        except (TGalaxyError, ValueError) as exc:
            out.append(Violation("UnknownId", f"alias {name}", str(exc)))
    return out


def _check_unrolled(g: WGraphPresentation) -> List[Violation]:
    from tgalaxy.wgraph.unroll import unroll

    out = []
    u = unroll(g, VALIDATION_DEPTH, ray_unit=1)
    frame = u.frame
    present = set(frame.rank.values())
    for rho in g.ranks():
        if rho.is_arrow:
            continue
        if rho not in present:
            out.append(Violation("NonemptyRankViolation", str(rho), f"X^{rho} is empty"))
    if not g.rank.is_finite:
        if not any(t.rank.is_arrow for _, w in g.declared_wnodes() for t in w.tips):
            out.append(Violation("ArrowTipMissing", str(g.rank), "rank-omega structure needs a warrow-tip"))
    for child, ups in sorted(frame.multi_parents.items(), key=lambda kv: str(kv[0])):
        out.append(Violation("EmbraceNotForest", str(child), "embraced by " + ", ".join(str(p) for p in ups)))
    if not nx.is_directed_acyclic_graph(frame.embrace_digraph()):
        out.append(Violation("EmbraceCycle", "embrace", "embrace relation has a cycle"))
    if not u.wconnected():
        out.append(Violation("NotWconnected", f"depth {VALIDATION_DEPTH}", "the unrolled graph falls apart"))
    return out


def validate(g: WGraphPresentation) -> List[Violation]:
    out = _check_block(g.core, "core", g.rank)
    for arm in g.arms:
        out.extend(_check_arm(g, arm))
    arm_ids = [a.id for a in g.arms]
    for dup in sorted({a for a in arm_ids if arm_ids.count(a) > 1}):
        out.append(Violation("DuplicateId", f"arm {dup}"))
    out.extend(_check_aliases(g))
    if not out:
        # the unrolled checks assume every reference resolves
        out.extend(_check_unrolled(g))
    out.sort(key=lambda v: (v.kind, v.where, v.message))
    logger.debug("validate: %d violation(s)", len(out))
    return out


def ensure_valid(g: WGraphPresentation) -> WGraphPresentation:
    violations = validate(g)
    if violations:
        raise InvalidPresentation(violations)
    return g
