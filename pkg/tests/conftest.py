import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from novikov.potential import PeriodicFunction

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_potential(rng: np.random.Generator, N: int, terms: int, kmax: int = 2) -> PeriodicFunction:
    out = []
    while len(out) < terms:
        k = rng.integers(-kmax, kmax + 1, size=N)
        if k.any():
            out.append((tuple(int(v) for v in k), float(rng.uniform(0.3, 1.5)), float(rng.uniform(0, 2 * np.pi))))
    return PeriodicFunction(N, out)


@st.composite
def potentials(draw, N=None, max_terms=5):
    N = draw(st.integers(2, 4)) if N is None else N
    seed = draw(st.integers(0, 2**32 - 1))
    terms = draw(st.integers(1, max_terms))
    return random_potential(np.random.default_rng(seed), N, terms)


@pytest.fixture
def rng():
    return np.random.default_rng(20260416)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
