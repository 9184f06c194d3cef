import sys
from importlib import resources

import pytest

from pbpsc import PBInstance, parse_instance


def fixture_text(name: str) -> str:
    return (resources.files("pbpsc") / "fixtures" / f"{name}.json").read_text(encoding="utf-8")


def load(name: str) -> PBInstance:
    return parse_instance(fixture_text(name))


@pytest.fixture
def approval4():
    """Approvals {a,b}, {a}, {c}, {c}; costs 1, 9/10, 1; L = 2."""
    return load("ipsc_not_cpsc")


@pytest.fixture
def strict6():
    return load("cpsc_not_ipsc")


@pytest.fixture
def mw4():
    return load("ear_unreachable")


@pytest.fixture
def one_voter():
    return load("no_cpsc_one_voter")


@pytest.fixture
def pjr12():
    return load("pjr_not_ipsc")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
