from importlib import resources
from pathlib import Path

import pytest

from groindex.dataset import (EntityId, EntityMetrics, WorldBaseline, parse_econ,
                              parse_entity_metrics, parse_world_baseline)
from groindex.fields import FIELDS
from groindex.indicators import CountPair

DATA = Path(str(resources.files("groindex") / "data"))
TEST_DATA = Path(__file__).parent / "data"

# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def world():
    return parse_world_baseline(DATA / "world_fields.csv")


@pytest.fixture(scope="session")
def country_entities():
    return parse_entity_metrics(DATA / "countries_entities.csv")


@pytest.fixture(scope="session")
def country_econ():
    return parse_econ(DATA / "countries_econ.csv")


@pytest.fixture
def uniform_world():
    """Every field at (1000, 2000)."""
    by_field = {f: CountPair(1000, 2000) for f in FIELDS}
    return WorldBaseline(CountPair(22000, 44000), by_field)


def entity(code, by_field, totals=None):
    if totals is None:
        totals = CountPair(sum(p.n_docs for p in by_field.values()),
                           sum(p.citations for p in by_field.values()))
    return EntityMetrics(EntityId(code), totals, by_field)


def world_as_entity(world, code="WORLD"):
    return EntityMetrics(EntityId(code), world.totals, dict(world.by_field))


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p
