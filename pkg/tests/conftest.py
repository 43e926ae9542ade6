"""Shared fixtures and the acceptance-verdict terminal hook."""

from __future__ import annotations

import sys

import numpy as np
import pytest

from jrsp import TargetState, generic_shares

TWO_PI = 2.0 * np.pi


def random_target(rng: np.random.Generator, phi: float | None = None) -> TargetState:
    """A Haar-ish interior target; amplitudes stay away from the poles."""
    theta = rng.uniform(0.05, np.pi / 2.0 - 0.05)
    if phi is None:
        phi = rng.uniform(0.1, TWO_PI - 0.1)
    return TargetState(np.cos(theta), np.sin(theta), phi)


def generic_run_args(rng: np.random.Generator, n: int) -> tuple[TargetState, tuple[float, ...]]:
    """Target plus generic shares whose sum is the target phase (mod 2 pi)."""
    shares = generic_shares(n - 1, rng)
    theta = rng.uniform(0.05, np.pi / 2.0 - 0.05)
    t = TargetState(np.cos(theta), np.sin(theta), sum(shares) % TWO_PI)
    return t, shares


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None) if mod is not None else None
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
