from pathlib import Path

import pytest

from tgalaxy.core.config import settings
from tgalaxy.hyper.context import EnlargementContext
from tgalaxy.wgraph.presentation import load_presentation

SUITES = Path(__file__).resolve().parents[1] / "suites"
SUITE_NAMES = ["path5", "triangle", "omega_ladder", "lad2", "star_of_rays", "two_arms", "omega_rank"]


def load_suite(name):
    return load_presentation(SUITES / f"{name}.json")


@pytest.fixture(autouse=True)
def _log_dir(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "LOG_DIR", str(tmp_path / "logs"))


@pytest.fixture
def suite_path():
    return lambda name: str(SUITES / f"{name}.json")


@pytest.fixture(scope="module")
def ladder():
    return load_suite("omega_ladder")


@pytest.fixture(scope="module")
def ladder_ctx(ladder):
    return EnlargementContext.from_graph(ladder)


@pytest.fixture(scope="module")
def two_arms_ctx():
    return EnlargementContext.from_graph(load_suite("two_arms"))
