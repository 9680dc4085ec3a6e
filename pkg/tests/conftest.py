"""Shared fixtures: a per-test seeded RNG and a one-time JIT warm-up.

The filter kernels are numba-compiled on first use. Warming them once per
session keeps individual test timings (and the budgeted acceptance timings)
free of compilation cost.
"""

from __future__ import annotations

import contextlib

import numpy as np
import pytest

from bankbeta.kalman import StateSpaceSpec, estimate_hyperparameters, kalman_filter

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng() -> np.random.Generator:
    """Fresh deterministic generator per test."""
    return np.random.default_rng(20240901)


@pytest.fixture(scope="session", autouse=True)
def _warm_jit() -> None:
    t = np.arange(40.0)
    y = np.sin(t / 5.0)
    X = np.column_stack([np.ones(40), np.cos(t / 7.0), t / 40.0])
    spec = StateSpaceSpec(y=y, X=X, state_var=np.full(3, 1e-4), obs_var=1e-2)
    kalman_filter(spec)
    # A tiny budget is enough to compile the likelihood kernel; the fit
    # itself may legitimately fail to converge and is discarded either way.
    with contextlib.suppress(Exception):
        estimate_hyperparameters(y, X, starts=1, max_fun_evals=40)


@pytest.fixture(scope="session")
def acceptance_report():
    """Recorder for one-line acceptance verdicts, echoed in the run summary."""

    def record(line: str) -> None:
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
