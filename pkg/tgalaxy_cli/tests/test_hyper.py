import pytest

from conftest import load_suite
from tgalaxy.core.errors import (
    ContextMismatch,
    FitFailure,
    InvalidPresentation,
    PresentationSyntaxError,
    RankAboveGraph,
    UnknownNode,
)
from tgalaxy.hyper import (
    ArmIndexed,
    EnlargementContext,
    IndexMap,
    No,
    ResidueClass,
    Standard,
    UltrafilterDependent,
    Yes,
    equivalent,
    hyperdistance,
    is_maximal_hypernode,
    limitedly_distant,
    merge_residues,
    parse_presentation,
    triangle_check,
)
from tgalaxy.hyper.engine import _window_verdict
from tgalaxy.ordinal import ARROW_OMEGA, FIN1

FORMS = [
    "std(ladder[1].x)",
    "arm(ladder,1,0,x)",
    "arm(ladder,2,3,x)",
    "arm(ladder,1,0,x,2,1)",
    "arm(ladder,[0,0,1],x)",
    "ray(ladder[2].P,1,0)",
    "interleave(2,std(ladder[1].x),arm(ladder,1,0,x))",
    "patch(arm(ladder,1,0,x),{3:ladder[0].x})",
]


@pytest.mark.parametrize("text", FORMS)
def test_presentation_format_round_trip(ladder, text):
    p = parse_presentation(text, ladder.resolve)
    assert p.format() == text
    assert parse_presentation(p.format(), ladder.resolve) == p


def test_parser_accepts_aliases_and_spacing(ladder):
    p = parse_presentation("arm( ladder , 1 , 0 , x , 2 , 1 )", ladder.resolve)
    assert p == ArmIndexed("ladder", IndexMap.affine(1, 0, 2, 1), "x")
    assert [p.node_at(n).block for n in range(5)] == [1, 1, 1, 1, 2]
    assert parse_presentation("std(x1)", ladder.resolve) == Standard(ladder.resolve("x1"))


@pytest.mark.parametrize("text", [
    "std(nowhere)",
    "arm(ladder, 1, x)",
    "circle(x1)",
    "interleave(3, std(x1), std(x2))",
    "std(x1) trailing",
    "patch(std(x1), {-1: x2})",
])
def test_parser_errors(ladder, text):
    with pytest.raises(PresentationSyntaxError):
        parse_presentation(text, ladder.resolve)


def test_index_map_floor_and_period():
    f = IndexMap.affine(1, 0, 2, 1)
    assert [f(n) for n in range(6)] == [1, 1, 1, 1, 2, 2]
    assert f.period() == 2
    assert f.stable_index() == 2
    assert str(f) == "max(1,floor((n)/2))"
    with pytest.raises(ValueError):
        IndexMap((0, -1))


def test_context_rejects_unknown_nodes(ladder_ctx):
    with pytest.raises(UnknownNode):
        ladder_ctx.copy({"bad": ArmIndexed("ladder", IndexMap.affine(1, 0), "y")})
    with pytest.raises(UnknownNode):
        ladder_ctx["nope"]


def test_interleave_branches_share_a_rank():
    g = load_suite("omega_ladder")
    ctx = EnlargementContext(g)
    with pytest.raises(InvalidPresentation):
        ctx.add("mixed", "interleave(2, std(s), arm(ladder, 1, 0, x))")


def test_reference_is_least_standard(ladder_ctx):
    assert ladder_ctx.standard_names() == ["std1", "std9"]
    assert ladder_ctx.reference_name() == "std1"
    bare = EnlargementContext(ladder_ctx.graph, {"xn": ladder_ctx["xn"].presentation})
    assert bare.with_reference().reference_name() == "std(s)"


def test_equivalent(ladder_ctx):
    ctx = ladder_ctx.copy({"patched": parse_presentation("patch(arm(ladder,1,0,x),{3:ladder[0].x})")})
    assert equivalent(ctx["xn"], ctx["patched"]) == Yes(0)
    assert equivalent(ctx["xn"], ctx["std1"]) == No()
    assert equivalent(ctx["std1"], ctx["std1"]) == Yes(0)


def test_maximal_hypernodes(ladder_ctx):
    assert is_maximal_hypernode(ladder_ctx, ladder_ctx["xn"]) == Yes(0)
    ctx = ladder_ctx.copy({"rays": parse_presentation("arm(ladder,1,1,P@0)")})
    assert is_maximal_hypernode(ctx, ctx["rays"]) == No()


def test_hyperdistance(ladder_ctx):
    [(rc, f)] = hyperdistance(ladder_ctx, "std1", "xn")
    assert rc == ResidueClass(1, 0)
    assert f.format() == "w*(n-1)"
    [(_, g)] = hyperdistance(ladder_ctx, "xn", "x2n")
    assert g.as_dict() == {FIN1: (0, 1)}
    assert g.valid_from == 0


def test_limitedly_distant(ladder_ctx):
    assert limitedly_distant(ladder_ctx, "std1", "std9", FIN1) == Yes(8)
    assert limitedly_distant(ladder_ctx, "std1", "xn", FIN1) == No()
    assert limitedly_distant(ladder_ctx, "xn", "x2n", FIN1) == No()
    with pytest.raises(RankAboveGraph):
        limitedly_distant(ladder_ctx, "std1", "xn", ARROW_OMEGA)


INTERLEAVE_CASES = [(m, j) for m in (2, 3, 4) for j in range(m)] + [(5, 2)]


@pytest.mark.parametrize("m,j", INTERLEAVE_CASES)
def test_interleave_is_ultrafilter_dependent(ladder_ctx, m, j):
    branches = ["arm(ladder,1,0,x)"] * m
    branches[j] = "std(x1)"
    ctx = ladder_ctx.copy()
    ctx.add("mix", f"interleave({m},{','.join(branches)})")
    verdict = limitedly_distant(ctx, "mix", "std1", FIN1)
    expected = tuple((ResidueClass(m, r), Yes(0) if r == j else No()) for r in range(m))
    assert verdict == UltrafilterDependent(expected)
    assert verdict.to_json()["verdict"] == "UltrafilterDependent"


def test_merge_residues_coarsens():
    items = [(ResidueClass(4, r), Yes(r) if r % 2 == 0 else No()) for r in range(4)]
    merged = merge_residues(items)
    assert merged == UltrafilterDependent(((ResidueClass(2, 0), Yes(2)), (ResidueClass(2, 1), No())))
    with pytest.raises(ValueError):
        merge_residues(items[:3])


def test_context_mismatch(ladder_ctx):
    other = EnlargementContext.from_graph(ladder_ctx.graph)
    with pytest.raises(ContextMismatch):
        equivalent(ladder_ctx["xn"], other["xn"])
    with pytest.raises(ContextMismatch):
        limitedly_distant(ladder_ctx, ladder_ctx["std1"], other["xn"], FIN1)


def test_triangle_check(ladder_ctx):
    assert triangle_check(ladder_ctx, "std1", "xn", "x2n", 6)


def test_window_verdict_settles_or_fails():
    assert _window_verdict(1, 0, 0, lambda n: n >= 3) is True
    assert _window_verdict(2, 1, 0, lambda n: n < 5) is False
    with pytest.raises(FitFailure):
        _window_verdict(1, 0, 0, lambda n: n % 2 == 0)
