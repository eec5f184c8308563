import math

import numpy as np
import pytest

from recurlab.experiments import run_experiment

# criterion number -> (passed, title, detail); filled by test_acceptance
ACCEPTANCE = {}

_REPORTS = {}


def experiment_report(name, workers=1):
    """Run an experiment once per (name, workers) for the whole session.

    Returns ``(report, seconds)``.
    """
    import time

    key = (name, workers)
    if key not in _REPORTS:
        t0 = time.perf_counter()
        rep = run_experiment(name, workers=workers)
        _REPORTS[key] = (rep, time.perf_counter() - t0)
    return _REPORTS[key]


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {title} :: {detail}")


def grid(lo, hi, n=401):
    return np.linspace(lo, hi, n)


PI = math.pi
