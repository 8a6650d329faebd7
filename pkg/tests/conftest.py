"""Shared fixtures: the demo panel data set and derived matrices.

Also prints a one-line PASS/FAIL verdict per acceptance criterion at the end
of the run (plain `pytest` swallows per-test prints, so the summary hook is
the only reliable channel).
"""

import json
import os
import re

import numpy as np
import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def load_fixture(name):
    with open(os.path.join(FIXTURES, name)) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def panel():
    return load_fixture("panel.json")


@pytest.fixture(scope="session")
def judgments_incomplete():
    """Ten 5x5 fuzzy judgment matrices with missing cells as None."""
    return load_fixture("judgments_incomplete.json")


@pytest.fixture(scope="session")
def judgments_completed():
    """The published completed counterparts (no missing cells)."""
    return load_fixture("judgments_completed.json")


@pytest.fixture(scope="session")
def intrinsic_statements():
    return load_fixture("intrinsic_statements.json")


@pytest.fixture(scope="session")
def u_intrinsic():
    """Published 10x5 intrinsic utility matrix."""
    return np.array(load_fixture("intrinsic_utilities.json"))


@pytest.fixture(scope="session")
def empathic_statements():
    """The six demo statements (a)-(f) about the empathic network."""
    return load_fixture("empathic_statements.json")


@pytest.fixture(scope="session")
def networks():
    """Published reference networks, keyed by target name."""
    return {k: np.array(v) for k, v in load_fixture("networks.json").items()}


@pytest.fixture(scope="session")
def empathic_utilities():
    """Published empathic utility matrices, keyed by network."""
    return {k: np.array(v) for k, v in load_fixture("empathic_utilities.json").items()}


@pytest.fixture(scope="session")
def welfare_table():
    return load_fixture("welfare_table.json")


CRITERIA = {
    "a": "intrinsic utilities",
    "b": "completion soundness",
    "c": "relation classification",
    "d": "sparse selection",
    "e": "central/distributed selection",
    "f": "resilience",
    "g": "global matrix",
    "h": "welfare",
    "i": "property suites",
}

_CRITERION_RE = re.compile(r"test_acceptance\.py::test_criterion_([a-z])")


def pytest_terminal_summary(terminalreporter):
    verdicts = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(outcome, ()):
            m = _CRITERION_RE.search(getattr(report, "nodeid", ""))
            if not m:
                continue
            letter = m.group(1)
            label = "PASS" if outcome == "passed" else outcome.upper()
            # a criterion may span several parametrized tests; any failure wins
            if verdicts.get(letter) in (None, "PASS"):
                verdicts[letter] = label
            elif label != "PASS":
                verdicts[letter] = label
    if not verdicts:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for letter in sorted(verdicts):
        name = CRITERIA.get(letter, "?")
        terminalreporter.write_line(
            f"criterion {letter.upper()} ({name}): {verdicts[letter]}"
        )
