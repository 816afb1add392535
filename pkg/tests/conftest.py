import numpy as np
import pytest

from covad import ScenarioConfig, draw_scenario


def crandn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_pd(rng, n, jitter=0.5):
    B = crandn(rng, (n, n))
    return B @ B.conj().T + jitter * np.eye(n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_scenario():
    return draw_scenario(ScenarioConfig(D_c=8, K_c=30, A_c=5, M=40, rng_seed=11))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
