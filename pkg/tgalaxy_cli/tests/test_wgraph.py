import json

import pytest

from conftest import SUITE_NAMES, load_suite
from tgalaxy.core.errors import InvalidDepth, InvalidPresentation, UnknownNode
from tgalaxy.ordinal import FIN1, OMEGA
from tgalaxy.wgraph.presentation import dump_presentation, load_presentation
from tgalaxy.wgraph.unroll import is_maximal, unroll
from tgalaxy.wgraph.validate import ensure_valid, validate


def _kinds(doc):
    return {v.kind for v in validate(load_presentation(doc))}


@pytest.mark.parametrize("name", SUITE_NAMES)
def test_suites_are_valid(name):
    assert validate(load_suite(name)) == []


def test_dump_and_reload(ladder):
    again = load_presentation(dump_presentation(ladder))
    assert again.model_dump() == ladder.model_dump()


def test_unknown_key_is_schema_violation():
    with pytest.raises(InvalidPresentation) as exc:
        load_presentation({"rank": 0, "core": {"nodes": ["a"]}, "colour": "red"})
    assert exc.value.violations[0].kind == "SchemaViolation"


def test_tip_must_name_one_source():
    doc = {"rank": 1, "core": {"nodes": ["a"], "wnodes": [
        {"id": "x", "rank": 1, "tips": [{"rank": 0}]}]}}
    with pytest.raises(InvalidPresentation):
        load_presentation(doc)


def test_structural_violations():
    assert "BranchNotTwoElement" in _kinds({"rank": 0, "core": {"nodes": ["a"], "branches": [["a", "a"]]}})
    assert "UnknownId" in _kinds({"rank": 0, "core": {"nodes": ["a"], "branches": [["a", "z"]]}})
    assert "MissingTip" in _kinds({"rank": 1, "core": {"nodes": ["a"], "wnodes": [
        {"id": "x", "rank": 1, "embraces": ["a"]}]}})
    assert "RankAboveGraph" in _kinds({"rank": 0, "core": {"rays": [{"id": "P"}], "wnodes": [
        {"id": "x", "rank": 1, "tips": [{"rank": 0, "ray": "P"}]}]}})
    assert "NotWconnected" in _kinds({"rank": 0, "core": {"nodes": ["a", "b"]}})


def test_gluing_must_name_ports(ladder):
    doc = json.loads(dump_presentation(ladder))
    doc["arms"][0]["gluing"] = {"x": "nowhere"}
    assert "PortUnknown" in _kinds(doc)


def test_ensure_valid_raises():
    g = load_presentation({"rank": 0, "core": {"nodes": ["a", "b"]}})
    with pytest.raises(InvalidPresentation) as exc:
        ensure_valid(g)
    assert [v.kind for v in exc.value.violations] == ["NotWconnected"]


def test_resolve(ladder):
    assert str(ladder.resolve("x3")) == "ladder[3].x"
    assert ladder.rank_of(ladder.resolve("x3")) == FIN1
    assert ladder.alias_of(ladder.resolve("ladder[2].x")) == "x2"
    with pytest.raises(UnknownNode):
        ladder.resolve("ladder[1].y")
    with pytest.raises(UnknownNode):
        ladder.resolve("nobody")


def test_omega_rank_ranks():
    g = load_suite("omega_rank")
    assert g.ranks()[-1] == OMEGA


def test_unroll_grows_with_depth(ladder):
    small = unroll(ladder, 2, ray_unit=3)
    large = unroll(ladder, 4, ray_unit=3)
    assert small.is_subgraph_of(large)
    assert len(small.nodes) < len(large.nodes)
    assert small.wconnected() and large.wconnected()
    doc = small.to_json()
    assert doc["depth"] == 2
    assert {n["rank"] for n in doc["nodes"]} == {0, 1}


def test_unroll_rejects_depth_zero(ladder):
    with pytest.raises(InvalidDepth):
        unroll(ladder, 0)


def test_is_maximal(ladder):
    assert is_maximal(ladder, "x1")
    assert is_maximal(ladder, "s")
    # x_k swallows the start of the next copy
    assert not is_maximal(ladder, "ladder[1].P@0")
