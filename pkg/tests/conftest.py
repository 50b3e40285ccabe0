import time

import numpy as np
import pytest

from magspec import models
from magspec.discretize import Disc
from magspec.field import ParabolicWell
from magspec.scan import SpectralPoint, SweepTable, sweep

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_RESULTS, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        request.config.stash[_RESULTS].append(line)
        return ok
    return report


@pytest.fixture(scope="session")
def constants():
    return models.model_constants()


@pytest.fixture(scope="session")
def disc_sweep_500_560(constants):
    """Disc, parabolic well delta = 0.05, B in [500, 560] at step 0.25, with its runtime."""
    start = time.perf_counter()
    table = sweep(ParabolicWell(0.05), Disc(), 500.0 + 0.25 * np.arange(241),
                  constants=constants)
    return table, time.perf_counter() - start


@pytest.fixture(scope="session")
def make_table():
    """Build a SweepTable from plain arrays, for testing the analysis functions."""
    def build(B, lam, m_star=None, fld=None, domain=None):
        m_star = m_star if m_star is not None else [0] * len(B)
        pts = tuple(SpectralPoint(float(b), float(v), int(m), (int(m) - 8, int(m) + 8), 0.0)
                    for b, v, m in zip(B, lam, m_star))
        return SweepTable(pts, domain or Disc(), fld or ParabolicWell(0.05))
    return build
