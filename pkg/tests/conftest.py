import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from smlab import PreferenceProfile

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")


@st.composite
def profiles(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    rows = st.permutations(list(range(n)))
    men = tuple(tuple(draw(rows)) for _ in range(n))
    women = tuple(tuple(draw(rows)) for _ in range(n))
    return PreferenceProfile(men, women)


@pytest.fixture
def rng():
    return np.random.default_rng(20260417)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, notes in sorted(test_acceptance.RESULTS):
        suffix = f" ({notes})" if notes else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{number}] {title}{suffix}")
