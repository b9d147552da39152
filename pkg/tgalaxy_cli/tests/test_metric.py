from itertools import combinations

import numpy as np
import pytest
from joblib import Parallel, delayed

from conftest import SUITE_NAMES, load_suite
from tgalaxy.core.errors import BoundTooSmall, InvalidWalk, UnknownNode
from tgalaxy.metric import (
    ArmPattern,
    WalkSpec,
    arm_distance_poly,
    geodesic,
    oracle_crosscheck,
    validate_walk,
    walk_length,
    wdistance,
    wdistance_oracle,
)
from tgalaxy.ordinal import FIN0, FIN1, ZERO, Ordinal, nat_mul, nat_sum, parse_ordinal
from tgalaxy.wgraph.steps import BranchStep, TipTraversal
from tgalaxy.wgraph.unroll import unroll

W = parse_ordinal


def test_path_distances():
    g = load_suite("path5")
    assert wdistance(g, "a", "e") == Ordinal.finite(4)
    assert wdistance(g, "b", "d") == Ordinal.finite(2)
    assert wdistance(g, "c", "c") == ZERO


def test_triangle_distances():
    g = load_suite("triangle")
    for x, y in combinations(["a", "b", "c"], 2):
        assert wdistance(g, x, y) == Ordinal.finite(1)


def test_ladder_distances(ladder):
    assert wdistance(ladder, "x1", "x3") == W("w*2")
    assert wdistance(ladder, "x0", "x5") == W("w*5")
    assert wdistance(ladder, "s", "x0") == W("w")
    for n in range(1, 8):
        assert wdistance(ladder, "x0", f"x{n}") == nat_mul(W("w"), n)


@pytest.mark.parametrize("suite", SUITE_NAMES)
def test_wdistance_is_symmetric_and_triangular(suite):
    g = load_suite(suite)
    nodes = unroll(g, 2).nodes
    rng = np.random.default_rng(11)
    for _ in range(500):
        x, y, z = (nodes[i] for i in rng.integers(0, len(nodes), size=3))
        dxy = wdistance(g, x, y)
        assert dxy == wdistance(g, y, x)
        assert dxy <= nat_sum(wdistance(g, x, z), wdistance(g, z, y))


def test_unknown_node(ladder):
    with pytest.raises(UnknownNode):
        wdistance(ladder, "x1", "nowhere")


@pytest.mark.parametrize("suite,x,y", [
    ("path5", "a", "e"),
    ("omega_ladder", "x1", "x3"),
    ("omega_ladder", "s", "x2"),
    ("lad2", "u0", "v1"),
])
def test_geodesic_realises_distance(suite, x, y):
    g = load_suite(suite)
    walk = geodesic(g, x, y)
    assert walk_length(walk) == wdistance(g, x, y)
    assert walk.endpoints == (g.resolve(x), g.resolve(y))
    validate_walk(g, walk)
    assert walk_length(walk.reversed()) == walk_length(walk)


def test_trivial_geodesic(ladder):
    walk = geodesic(ladder, "x2", "x2")
    assert walk.steps == ()
    assert walk_length(walk) == ZERO


def test_walk_length_counts_steps(ladder):
    x, y = ladder.resolve("x0"), ladder.resolve("x1")
    walk = WalkSpec((x, x, y), (BranchStep("b"), TipTraversal(FIN0)))
    assert walk_length(walk) == W("w+1")
    with pytest.raises(InvalidWalk):
        walk_length(WalkSpec((x, y), ()))


def test_oracle_agrees_on_small_graphs():
    g = load_suite("path5")
    assert wdistance_oracle(g, "a", "e", 0, 4) == Ordinal.finite(4)
    with pytest.raises(BoundTooSmall):
        wdistance_oracle(g, "a", "e", 0, 3)
    ladder = load_suite("omega_ladder")
    assert wdistance_oracle(ladder, "x1", "x3", 4, 12) == wdistance(ladder, "x1", "x3")


def test_oracle_agrees_on_every_pair_of_small_unrollings():
    checked = []
    for name in SUITE_NAMES:
        g = load_suite(name)
        unrolled = unroll(g, 1)
        if len(unrolled.branches) > 12:
            continue
        report = oracle_crosscheck(g, 1)
        n = len(unrolled.nodes)
        assert report["mismatches"] == [], name
        assert report["skipped"] == 0, name
        assert report["pairs_checked"] == n * (n - 1) // 2
        checked.append(name)
    assert {"path5", "triangle", "omega_ladder", "star_of_rays"} <= set(checked)


def test_oracle_agrees_on_sampled_pairs():
    total = 0
    for seed, name in enumerate(["omega_ladder", "lad2", "star_of_rays", "two_arms"]):
        report = oracle_crosscheck(load_suite(name), 2, pairs=130, seed=seed)
        assert report["mismatches"] == [], name
        assert report["pairs_checked"] + report["skipped"] == 130
        total += report["pairs_checked"]
    assert total >= 500


def test_oracle_crosscheck_escalates_tight_bounds():
    g = load_suite("path5")
    report = oracle_crosscheck(g, 1, max_tips=0, max_steps=1)
    assert report["ok"] and report["skipped"] == 0
    assert oracle_crosscheck(g, 1, max_tips=0, max_steps=0, escalations=0)["skipped"] > 0
    with pytest.raises(ValueError):
        oracle_crosscheck(g, 1, max_steps=-1)


def test_oracle_rejects_negative_bounds(ladder):
    with pytest.raises(ValueError):
        wdistance_oracle(ladder, "x0", "x1", -1, 2)


def test_arm_distance_poly(ladder):
    f = arm_distance_poly(ladder, "x1", ArmPattern("ladder", 1, 0, "x"))
    assert f.as_dict() == {FIN1: (-1, 1)}
    assert f.valid_from == 1
    assert f.evaluate(6) == W("w*5")

    g = arm_distance_poly(ladder, "s", ArmPattern("ladder", 2, 0, "x"))
    assert g.as_dict() == {FIN1: (1, 2)}
    assert g.valid_from == 0


def test_arm_distance_poly_errors(ladder):
    with pytest.raises(UnknownNode):
        arm_distance_poly(ladder, "x1", ArmPattern("nowhere", 1, 0, "x"))
    with pytest.raises(UnknownNode):
        arm_distance_poly(ladder, "x1", ArmPattern("ladder", 1, 0, "y"))
    with pytest.raises(ValueError):
        arm_distance_poly(ladder, "x1", ArmPattern("ladder", -1, 0, "x"))


def test_distance_memo_is_shared_across_threads():
    g = load_suite("omega_ladder")
    pairs = [("x0", f"x{n}") for n in range(1, 9)] * 4
    found = Parallel(n_jobs=4, prefer="threads")(delayed(wdistance)(g, x, y) for x, y in pairs)
    assert found == [nat_mul(W("w"), int(y[1:])) for _, y in pairs]
    memo = g.compiled().distance_memo
    x0 = g.resolve("x0")
    for n in range(1, 9):
        xn = g.resolve(f"x{n}")
        assert memo[(x0, xn, None)] == memo[(xn, x0, None)] == nat_mul(W("w"), n)
