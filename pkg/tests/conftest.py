import itertools
import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")


def jones_left_prob(step: int, resolution: int) -> float:
    """Horizontal-port probability after a half-wave plate, via Jones matrices.

    Independent of the closed form used by the package: the plate at angle
    phi = -45/(N-1) * step acts on the 45-degree input as
    [[cos 2phi, sin 2phi], [sin 2phi, -cos 2phi]].
    """
    phi = math.radians(-45.0 / (resolution - 1) * step)
    hwp = np.array([[math.cos(2 * phi), math.sin(2 * phi)], [math.sin(2 * phi), -math.cos(2 * phi)]])
    e_in = np.array([math.cos(math.pi / 4), math.sin(math.pi / 4)])
    e_out = hwp @ e_in
    return float(e_out[0] ** 2)


def enumerate_leaf_probs(depth: int, steps, resolutions) -> list[float]:
    """Brute-force leaf probabilities by walking every left/right path."""
    probs = []
    for sides in itertools.product((0, 1), repeat=depth):
        k, p = 1, 1.0
        for side in sides:
            q = jones_left_prob(steps[k - 1], resolutions[k - 1])
            p *= q if side == 0 else 1.0 - q
            k = 2 * k + side
        probs.append(p)
    return probs


@pytest.fixture
def rng():
    return np.random.default_rng(20161)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, passed: bool, detail: str) -> None:
    """Record one acceptance line; printed in the terminal summary."""
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
