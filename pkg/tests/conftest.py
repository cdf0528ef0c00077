from __future__ import annotations

import os
import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pcpforge.csp import Assignment
from pcpforge.generators import random_instance

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile(
    "repo", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))


@pytest.fixture
def fixtures():
    return FIXTURES


@st.composite
def instances(draw, max_n=5, max_m=6, max_q=3, family="tuples"):
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(1, max_m))
    q = draw(st.integers(2, max_q))
    seed = draw(st.integers(0, 10**6))
    return random_instance(n, m, q, family, seed=seed)


def uniform_assignment(instance, rng: random.Random) -> Assignment:
    return Assignment(
        {v: instance.alphabet(v).label_at(rng.randrange(instance.alphabet(v).size)) for v in instance.sorted_variables()}
    )


# ---------------------------------------------------------------- acceptance summary

_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    number, text, limit = mark.args
    ok = call.excinfo is None
    _CRITERIA[number] = (ok, text, call.duration, limit)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, text, secs, limit = _CRITERIA[number]
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}  ({secs:.2f}s, limit {limit}s)"
        )
