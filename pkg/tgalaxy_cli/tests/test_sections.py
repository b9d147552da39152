import pytest

from conftest import load_suite
from tgalaxy.core.errors import ArrowOmegaRank, HypothesisViolated, NotIncident, RankAboveGraph, RankMismatch
from tgalaxy.metric import validate_walk, walk_length, wdistance
from tgalaxy.ordinal import ARROW_OMEGA, FIN0, FIN1, ExtRank, nat_mul, omega_pow
from tgalaxy.sections import (
    SectionEngine,
    adjacency_check,
    boundary_wnodes,
    connecting_walk,
    escape_presentation,
    escape_walk,
    has_infinite_boundary,
    incident,
    incident_sections,
    is_boundary,
    locally_rho_finite,
    nested,
    wadjacent,
    wsections,
)
from tgalaxy.wgraph.unroll import unroll


def _top(g, rho=FIN1):
    sections = wsections(g, rho)
    assert len(sections) == 1
    return sections[0]


def test_ladder_sections(ladder):
    rays = wsections(ladder, FIN0)
    assert len(rays) == 1 and rays[0].is_family
    top = _top(ladder)
    assert top.is_infinite and not top.is_family
    assert nested(rays[0], top)


def test_sections_reject_high_rank(ladder):
    with pytest.raises(RankAboveGraph):
        wsections(ladder, ExtRank.fin(2))


def test_boundary_of_ladder(ladder):
    assert is_boundary(ladder, "x3")
    assert len(incident_sections(ladder, "x3")) == 2
    top = _top(ladder)
    assert has_infinite_boundary(ladder, top)
    found = {str(w) for w in boundary_wnodes(ladder, top)}
    assert {"ladder[0].x", "ladder[1].x"} <= found


def test_incidence_rank_mismatch(ladder):
    with pytest.raises(RankMismatch):
        incident(ladder, "x1", _top(ladder))
    with pytest.raises(RankMismatch):
        incident_sections(ladder, "s")


def test_neighbouring_ladder_wnodes_are_wadjacent(ladder):
    assert wadjacent(ladder, "x1", "x2")
    assert not wadjacent(ladder, "x1", "x3")
    with pytest.raises(RankMismatch):
        wadjacent(ladder, "x1", "s")


def test_local_finiteness():
    ladder = load_suite("omega_ladder")
    assert locally_rho_finite(ladder, _top(ladder))
    star = load_suite("star_of_rays")
    assert not locally_rho_finite(star, _top(star))


def test_local_finiteness_undefined_at_arrow_rank():
    g = load_suite("omega_rank")
    sections = wsections(g, ARROW_OMEGA)
    with pytest.raises(ArrowOmegaRank):
        locally_rho_finite(g, sections[0])


def test_escape_walk(ladder):
    top = _top(ladder)
    picks = escape_walk(ladder, top, "x0", 10)
    assert [str(w) for w, _ in picks] == [f"ladder[{k}].x" for k in range(1, 11)]
    for k, (_, d) in enumerate(picks, start=1):
        assert d >= nat_mul(omega_pow(FIN1), k)
    assert escape_walk(ladder, top, "x0", 0) == []


def test_escape_presentation(ladder):
    picks = escape_walk(ladder, _top(ladder), "x0", 4)
    p = escape_presentation(ladder, picks)
    assert p.format() == "arm(ladder,1,1,x)"
    assert str(p.node_at(2)) == "ladder[3].x"


def test_escape_walk_needs_local_finiteness():
    star = load_suite("star_of_rays")
    with pytest.raises(HypothesisViolated):
        escape_walk(star, _top(star), "y0", 3)


def test_escape_walk_needs_matching_start_rank(ladder):
    with pytest.raises(HypothesisViolated):
        escape_walk(ladder, _top(ladder), "s", 3)


@pytest.mark.parametrize("suite", ["omega_ladder", "lad2"])
def test_adjacency_check(suite):
    report = adjacency_check(load_suite(suite), FIN1)
    assert report["ok"], report["failures"]
    assert report["pairs_checked"] > 0


def test_adjacency_check_rank_zero(ladder):
    with pytest.raises(RankMismatch):
        adjacency_check(ladder, FIN0)


@pytest.mark.parametrize("suite", ["omega_ladder", "lad2", "star_of_rays"])
def test_walks_between_zero_sections_cost_at_least_omega(suite):
    g = load_suite(suite)
    branches = sorted(unroll(g, 3).branches.items())
    crossings = 0
    for w in SectionEngine.of(g).rank_wnodes(FIN1):
        if w.copy_index > 1 or not is_boundary(g, w):
            continue
        ends = [sorted({n for k, pair in branches if t.contains(k) for n in pair}, key=str)[:3]
                for t in incident_sections(g, w)]
        assert len(ends) >= 2 and all(ends)
        for i, xs in enumerate(ends):
            for ys in ends[i + 1:]:
                for x in xs:
                    for y in ys:
                        crossings += 1
                        assert not wdistance(g, x, y) < omega_pow(FIN1), (w, x, y)
    assert crossings > 0


def test_connecting_walk(ladder):
    s = incident_sections(ladder, "x2")[0]
    walk = connecting_walk(ladder, "x2", "x2", s)
    assert walk.steps == ()
    shared = [t for t in incident_sections(ladder, "x1") if t in incident_sections(ladder, "x2")]
    assert len(shared) == 1
    walk = connecting_walk(ladder, "x1", "x2", shared[0])
    validate_walk(ladder, walk)
    assert walk.endpoints == (ladder.resolve("x1"), ladder.resolve("x2"))
    assert walk_length(walk) >= omega_pow(FIN1)


def test_connecting_walk_needs_incidence(ladder):
    far = [t for t in incident_sections(ladder, "x5") if t not in incident_sections(ladder, "x1")]
    with pytest.raises(NotIncident):
        connecting_walk(ladder, "x1", "x5", far[0])
