import pytest

from conftest import load_suite
from tgalaxy.core.errors import ArrowOmegaRank, HypothesisViolated, NotArmIndexed, RankAboveGraph, RankOrder
from tgalaxy.galaxy import (
    classify,
    closer_than,
    containment_check,
    dichotomy_check,
    escape_check,
    hyperbranch_check,
    order_partition,
    refinement_check,
    single_galaxy_propagation,
    witness_chain,
)
from tgalaxy.hyper import EnlargementContext, No, Yes
from tgalaxy.ordinal import ARROW_OMEGA, FIN0, FIN1, OMEGA, ExtRank


@pytest.fixture(scope="module")
def omega_ctx():
    return EnlargementContext.from_graph(load_suite("omega_rank"))


def _members(part):
    return [list(c.members) for c in part.classes]


def test_classify_ladder(ladder_ctx):
    part = classify(ladder_ctx, FIN1)
    assert _members(part) == [["std1", "std9"], ["x2n"], ["xn"]]
    assert part.principal.members == ("std1", "std9")
    assert part.reference == "std1"
    assert part.verdicts[("std1", "std9")] == Yes(8)
    assert part.ambiguities == []


def test_classify_rank_zero_splits_everything(ladder_ctx):
    part = classify(ladder_ctx, FIN0)
    assert len(part.classes) == 4


def test_classify_is_independent_of_jobs(ladder_ctx, two_arms_ctx):
    for ctx in (ladder_ctx, two_arms_ctx):
        assert classify(ctx, FIN1, jobs=1).to_json() == classify(ctx, FIN1, jobs=4).to_json()


def test_classify_rejects_high_rank(ladder_ctx):
    with pytest.raises(RankAboveGraph):
        classify(ladder_ctx, ExtRank.fin(2))
    with pytest.raises(RankAboveGraph):
        classify(ladder_ctx, ARROW_OMEGA)


def test_classify_adds_reference():
    g = load_suite("omega_ladder")
    ctx = EnlargementContext(g, {"xn": EnlargementContext.from_graph(g)["xn"].presentation})
    part = classify(ctx, FIN1)
    assert part.reference == "std(s)"
    assert part.principal.members == ("std(s)",)


def test_classify_rank_omega(omega_ctx):
    assert len(classify(omega_ctx, OMEGA).classes) == 1
    part = classify(omega_ctx, ARROW_OMEGA)
    assert part.class_of("xn").principal
    assert not part.class_of("apex").principal


def test_refinement(ladder_ctx, omega_ctx):
    assert refinement_check(ladder_ctx, FIN0, FIN1)
    assert refinement_check(omega_ctx, FIN1, OMEGA)
    with pytest.raises(RankOrder):
        refinement_check(ladder_ctx, FIN1, FIN0)


def test_closer_than(ladder_ctx):
    part = classify(ladder_ctx, FIN1)
    assert closer_than(ladder_ctx, "xn", "x2n", FIN1) == Yes(0)
    assert closer_than(ladder_ctx, "x2n", "xn", FIN1) == No()
    assert closer_than(ladder_ctx, part.principal, part.class_of("xn"), FIN1) == Yes(0)
    assert closer_than(ladder_ctx, part.class_of("xn"), part.principal, FIN1) == No()
    with pytest.raises(ArrowOmegaRank):
        closer_than(ladder_ctx, "xn", "x2n", ARROW_OMEGA)


def test_order_on_two_arms(two_arms_ctx):
    part = classify(two_arms_ctx, FIN1)
    assert len(part.classes) == 6
    report = order_partition(two_arms_ctx, part)
    assert report.incomparable == [("a2n", "b2n"), ("an", "bn")]
    assert report.antisymmetric and report.transitive and report.acyclic
    assert not report.total
    assert report.ok
    assert ("origin", "an") in report.hasse
    assert ("an", "a2n") in report.hasse
    assert ("origin", "a2n") not in report.hasse
    assert report.regression is None


def test_order_of_a_chain_is_total(ladder_ctx):
    report = order_partition(ladder_ctx, classify(ladder_ctx, FIN1))
    assert report.total
    assert report.hasse == [("std1", "xn"), ("xn", "x2n")]
    assert report.regression == {"reference": "std9", "mismatches": []}


def test_witness_chain(ladder_ctx):
    chain = witness_chain(ladder_ctx, "xn", 5, FIN1)
    assert len(chain.classes) == 11
    assert len(chain.pairwise) == 55
    assert chain.names[5] == "xn"
    assert chain.ok
    doc = chain.to_json()
    assert [c["name"] for c in doc["chain"]][:2] == ["xn.u5", "xn.u4"]


def test_short_witness_chain(ladder_ctx):
    chain = witness_chain(ladder_ctx, ladder_ctx["x2n"], 2, FIN1)
    assert chain.names == ["x2n.u2", "x2n.u1", "x2n", "x2n.w1", "x2n.w2"]
    assert all(chain.sandwich.values())
    assert chain.reverse_ok


def test_witness_chain_preconditions(ladder_ctx, omega_ctx):
    with pytest.raises(NotArmIndexed):
        witness_chain(ladder_ctx, "std1", 2, FIN1)
    with pytest.raises(HypothesisViolated):
        witness_chain(omega_ctx, "xn", 2, OMEGA)
    with pytest.raises(ArrowOmegaRank):
        witness_chain(ladder_ctx, "xn", 2, ARROW_OMEGA)


def test_dichotomy(ladder_ctx, omega_ctx):
    chain = dichotomy_check(ladder_ctx, FIN1, 1)
    assert chain["outcome"] == "chain" and chain["galaxies"] == 3 and chain["ok"]
    single = dichotomy_check(omega_ctx, OMEGA, 1)
    assert single == {"rank": "omega", "outcome": "single", "galaxies": 1, "ok": True}


def test_hyperbranch_check(ladder_ctx):
    report = hyperbranch_check(ladder_ctx, FIN1)
    assert report["ok"] and report["pairs_checked"] == 1
    path = EnlargementContext.from_graph(load_suite("path5"))
    report = hyperbranch_check(path, FIN0)
    assert report["ok"] and report["pairs_checked"] == 4


def test_single_galaxy_propagation(ladder_ctx, omega_ctx):
    path = EnlargementContext.from_graph(load_suite("path5"))
    assert single_galaxy_propagation(path, FIN0)
    assert single_galaxy_propagation(omega_ctx, OMEGA)
    assert single_galaxy_propagation(ladder_ctx, FIN1)


def test_containment_check(ladder_ctx):
    report = containment_check(ladder_ctx)
    assert report["pairs_checked"] == 3
    assert report["ok"], report["failures"]


def test_containment_check_across_suites():
    total = 0
    for name in ["path5", "triangle", "omega_ladder", "lad2", "star_of_rays", "two_arms"]:
        report = containment_check(EnlargementContext.from_graph(load_suite(name)))
        assert report["ok"], (name, report["failures"])
        total += report["pairs_checked"]
    assert total >= 10


def test_escape_check(ladder_ctx):
    report = escape_check(ladder_ctx, FIN1, 3)
    assert report["ok"]
    [walk] = report["walks"]
    assert walk["start"] == "ladder[0].x"
    assert walk["picks"] == ["ladder[1].x", "ladder[2].x", "ladder[3].x"]
    assert walk["outside_principal"] is True
