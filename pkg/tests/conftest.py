import numpy as np
import pytest

from attfilt.so3 import exp_map

# acceptance lines collected during the run, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rotation_batch(n, rng):
    """Rotations spread over all angles plus clusters near 0 and pi."""
    axes = rng.standard_normal((n, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    third = n // 3
    ang = np.concatenate(
        [
            rng.uniform(0.0, np.pi, n - 2 * third),
            10.0 ** rng.uniform(-12, -2, third),
            np.pi - 10.0 ** rng.uniform(-12, -2, third),
        ]
    )
    return np.array([exp_map(a * ax) for a, ax in zip(ang, axes)]), ang
