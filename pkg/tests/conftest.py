import re

import pytest

from densitometer import (
    Rectangle,
    Schedule,
    WeightSequence,
    build_cover,
    build_packing,
    build_rate_function,
    choose_subsequence,
)

UNIT_BOX = Rectangle.from_bounds(0.0, 1.0, 0.0, 1.0)


@pytest.fixture(scope="session")
def canonical_seq():
    """w_n^2 = 0.25 / n^2, the worked running example."""
    return WeightSequence.power(0.25, 2.0)


@pytest.fixture(scope="session")
def geometric_seq():
    return WeightSequence.geometric(1.0, 0.5)


@pytest.fixture(scope="session")
def canonical_selection(canonical_seq):
    return choose_subsequence(canonical_seq, Schedule(40), 9)


@pytest.fixture(scope="session")
def canonical_ratefn(canonical_selection):
    return build_rate_function(canonical_selection)


@pytest.fixture(scope="session")
def canonical_model(canonical_seq):
    # blocks through s = 4: trunc = 5^5 - 1
    return build_packing(canonical_seq, 3124, UNIT_BOX)


@pytest.fixture(scope="session")
def canonical_cover(canonical_model):
    return build_cover(canonical_model, 3, 4)


# One outcome line per acceptance criterion at the end of the run.

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for category, verdict in (
        ("passed", "PASS"),
        ("failed", "FAIL"),
        ("error", "ERROR"),
        ("xfailed", "XFAIL (expected failure, see decision ledger)"),
        ("xpassed", "XPASS (unexpected pass)"),
        ("skipped", "SKIPPED"),
    ):
        for report in terminalreporter.stats.get(category, []):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if match:
                outcomes[(match.group(1), match.group(2))] = verdict
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (number, label), verdict in sorted(outcomes.items()):
        pretty = label.replace("_", " ")
        terminalreporter.write_line(f"criterion {number}: {verdict} - {pretty}")
