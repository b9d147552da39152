"""Brute-force wdistance: bounded walk enumeration on an explicit unrolling."""
from itertools import combinations
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from tgalaxy.core.config import settings
from tgalaxy.core.errors import BoundTooSmall
from tgalaxy.core.utils import get_logger
from tgalaxy.metric.search import wdistance
from tgalaxy.ordinal.arith import ZERO, Ordinal, format_ordinal, nat_sum
from tgalaxy.wgraph.presentation import WGraphPresentation
from tgalaxy.wgraph.refs import WNodeRef
from tgalaxy.wgraph.steps import BranchStep
from tgalaxy.wgraph.unroll import frame_depth_for, ref_key, unroll

logger = get_logger("metric")


def _adjacency(frame) -> Dict[WNodeRef, List[Tuple[Ordinal, WNodeRef, bool]]]:
    best: Dict[Tuple[WNodeRef, WNodeRef, bool], Ordinal] = {}
    for e in frame.edges:
        su, sv = frame.supernode_of(e.u), frame.supernode_of(e.v)
        if su == sv:
            continue
        is_tip = not isinstance(e.step, BranchStep)
        for a, b in ((su, sv), (sv, su)):
            key = (a, b, is_tip)
            if key not in best or e.weight < best[key]:
                best[key] = e.weight
    adj: Dict[WNodeRef, List[Tuple[Ordinal, WNodeRef, bool]]] = {}
    for (a, b, is_tip), w in best.items():
        adj.setdefault(a, []).append((w, b, is_tip))
    for lst in adj.values():
        lst.sort(key=lambda t: (t[0], ref_key(t[1]), t[2]))
    return adj


def wdistance_oracle(g: WGraphPresentation, x, y, max_tip_crossings: int, max_branch_steps: int) -> Ordinal:
    """Least length over simple super-node walks within the step bounds."""
    if max_tip_crossings < 0 or max_branch_steps < 0:
        raise ValueError("oracle bounds are natural numbers")
    x, y = g.resolve(x), g.resolve(y)
    depth = frame_depth_for(x, y, extra=3)
    reach = max([depth * settings.RAY_UNIT] + [(r.position or 0) + max_branch_steps for r in (x, y)])
    frame = g.compiled().frame(depth, ray_limit=reach)
    sx, sy = frame.supernode_of(x), frame.supernode_of(y)
    if sx == sy:
        return ZERO
    adj = _adjacency(frame)
    best: Optional[Ordinal] = None
    visited = {sx}

    def walk(u: WNodeRef, length: Ordinal, tips: int, branches: int):
        nonlocal best
        if best is not None and not length < best:
            return
        if u == sy:
            best = length
            return
        for w, v, is_tip in adj.get(u, ()):
            t, b = tips + is_tip, branches + (not is_tip)
            if v in visited or t > max_tip_crossings or b > max_branch_steps:
                continue
            visited.add(v)
            walk(v, nat_sum(length, w), t, b)
            visited.discard(v)

    walk(sx, ZERO, 0, 0)
    if best is None:
        raise BoundTooSmall(
            f"no walk from {x} to {y} with <= {max_tip_crossings} tip crossings and <= {max_branch_steps} branches"
        )
    logger.debug("oracle d(%s,%s)=%s at depth %d", x, y, best, depth)
    return best


def settled_oracle(g: WGraphPresentation, x, y, found: Ordinal, tips: int, steps: int,
                   escalations: int) -> Optional[Ordinal]:
    """Oracle value for (x, y), doubling the bounds while no walk as short as `found` is in reach."""
    expected = None
    for _ in range(escalations + 1):
        try:
            expected = wdistance_oracle(g, x, y, tips, steps)
        except BoundTooSmall:
            pass
        else:
            if not found < expected:
                return expected
        tips, steps = 2 * tips + 1, 2 * steps + 1
    return expected


def oracle_crosscheck(g: WGraphPresentation, depth: int, *, max_tips: Optional[int] = None,
                      max_steps: Optional[int] = None, pairs: int = 0, seed: Optional[int] = None,
                      escalations: int = 2) -> Dict[str, Any]:
    """
    Compare `wdistance` with the oracle on node pairs of `unroll(g, depth)`.

    With `pairs` > 0 a seeded sample of that many pairs is checked. An oracle
    walk longer than the search result may only mean the bounds were too tight,
    so such pairs are retried with doubled bounds before counting as mismatches.
    Pairs the oracle never reaches are counted as skipped.
    """
    tips = settings.ORACLE_MAX_TIPS if max_tips is None else max_tips
    steps = settings.ORACLE_MAX_STEPS if max_steps is None else max_steps
    if tips < 0 or steps < 0 or escalations < 0:
        raise ValueError("oracle bounds are natural numbers")
    candidates = list(combinations(unroll(g, depth).nodes, 2))
    if pairs and len(candidates) > pairs:
        rng = np.random.default_rng(settings.SEED if seed is None else seed)
        chosen = sorted(rng.choice(len(candidates), size=pairs, replace=False).tolist())
        candidates = [candidates[i] for i in chosen]
    mismatches: List[Dict[str, str]] = []
    skipped = 0
    for x, y in candidates:
        found = wdistance(g, x, y)
        expected = settled_oracle(g, x, y, found, tips, steps, escalations)
        if expected is None:
            skipped += 1
        elif expected != found:
            mismatches.append({"x": str(x), "y": str(y), "search": format_ordinal(found),
                               "oracle": format_ordinal(expected)})
    logger.info("oracle crosscheck at depth %d: %d pairs, %d skipped, %d mismatches",
                depth, len(candidates), skipped, len(mismatches))
    return {"depth": depth, "pairs_checked": len(candidates) - skipped, "skipped": skipped,
            "mismatches": mismatches, "ok": not mismatches}
