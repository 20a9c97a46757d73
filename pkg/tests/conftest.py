import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from chaoslab.dyadic import DyadicStep  # noqa: E402
from chaoslab.walsh import ChaosCoeffs, pairs_up_to  # noqa: E402

settings.register_profile(
    "repo", deadline=None, max_examples=60, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@st.composite
def steps(draw, min_level=0, max_level=6):
    level = draw(st.integers(min_level, max_level))
    vals = draw(st.lists(finite, min_size=1 << level, max_size=1 << level))
    return DyadicStep(level, np.array(vals))


@st.composite
def coeffs(draw, max_index=6, min_size=1):
    pool = pairs_up_to(max_index)
    chosen = draw(st.lists(st.sampled_from(pool), min_size=min_size, max_size=len(pool), unique=True))
    vals = draw(st.lists(st.floats(-10, 10, allow_nan=False).filter(lambda v: v != 0),
                         min_size=len(chosen), max_size=len(chosen)))
    return ChaosCoeffs.from_pairs(chosen, vals)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
