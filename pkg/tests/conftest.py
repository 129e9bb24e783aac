from __future__ import annotations

from pathlib import Path

import pytest

from qdef.model import make_system
from qdef.syntax import parse_database, parse_dataset, parse_mapping, parse_ontology, parse_ucq

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def load_system(onto: str, mapping: str, db: str):
    m = parse_mapping(fixture_text(mapping))
    o = parse_ontology(fixture_text(onto), signature={a.predicate for x in m for a in x.target.body})
    return make_system(o, m, parse_database(fixture_text(db)).facts)


def load_dataset(name: str):
    return parse_dataset(fixture_text(name))


def load_query(name: str, system=None):
    return parse_ucq(fixture_text(name), system.ontology.signature if system else None)


@pytest.fixture
def ex3():
    return load_system("ex3.onto", "ex3.map", "ex3.db")


@pytest.fixture
def ex5():
    return load_system("ex3.onto", "ex3.map", "ex5.db")


@pytest.fixture
def mirror():
    return load_system("empty.onto", "mirror.map", "mirror.db")


@pytest.fixture
def mirror2():
    return load_system("empty.onto", "mirror.map", "mirror2.db")


@pytest.fixture
def violating():
    return load_system("disjoint.onto", "disjoint.map", "disjoint.db")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
