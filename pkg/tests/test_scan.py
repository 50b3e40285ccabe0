import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magspec import scan as S
from magspec.discretize import Annulus, Disc, ExteriorDisc, Plane
from magspec.errors import ConfigError, DomainError, ResolutionError
from magspec.field import Constant, ParabolicWell, flux


def test_limit_operator_values_and_ties():
    assert S.limit_operator_lambda(1.0, 2.0) == (0.0, 1)
    assert S.limit_operator_lambda(1.0, 3.0) == (0.25, 1)
    assert S.limit_operator_lambda(1.0, 0.0) == (0.0, 0)
    with pytest.raises(DomainError):
        S.limit_operator_lambda(0.0, 1.0)


@settings(max_examples=80, deadline=None)
@given(ri=st.floats(0.3, 3.0), B=st.floats(0.0, 60.0))
def test_limit_operator_is_brute_force_minimum(ri, B):
    brute = min((m / ri - B * ri / 2) ** 2 for m in range(0, int(B * ri * ri) + 3))
    assert S.limit_operator_lambda(ri, B)[0] == pytest.approx(brute, abs=1e-12)


def test_zero_field_ground_state():
    p = S.ground_state(Constant(1.0), Annulus(1.0, 1.5), 0.0)
    assert 0.0 <= p.lambda1 < 1e-8
    assert p.m_star == 0


def test_window_contains_minimizer_and_adaptivity_is_bounded(constants):
    for fld, dom, B in ((ParabolicWell(0.05), Disc(), 500.0),
                        (ParabolicWell(0.05), ExteriorDisc(), 400.0),
                        (ParabolicWell(1.0), Plane(), 400.0),
                        (Constant(1.0), Annulus(1.0, 1.5), 30.0)):
        lo, hi = S.m_window(fld, dom, B, constants)
        p = S.ground_state(fld, dom, B, constants=constants)
        assert lo + S.EDGE_MARGIN <= p.m_star <= hi - S.EDGE_MARGIN
        assert p.fibers_evaluated <= 4 * (hi - lo)


def test_window_grows_when_prediction_is_off(monkeypatch):
    monkeypatch.setattr(S, "m_window", lambda fld, dom, B, c=None: (-30, -14))
    p = S.ground_state(Constant(1.0), Annulus(1.0, 1.5), 10.0)
    assert p.m_star == S.ground_state(Constant(1.0), Annulus(1.0, 1.5), 10.0, n=p.n).m_star
    assert p.window[1] > 0


def test_runaway_window_raises(monkeypatch):
    monkeypatch.setattr(S, "MAX_FIBERS", 5)
    with pytest.raises(S.RunawayError):
        S.ground_state(Constant(1.0), Annulus(1.0, 1.5), 10.0)


def test_tie_reports_smaller_m(monkeypatch):
    real = S.fiber_lambda

    def fake(fld, dom, m, B, n=None):
        return real(fld, dom, 0 if m in (0, 1) else m, B, n) + (0.0 if m in (0, 1) else 1.0)

    monkeypatch.setattr(S, "fiber_lambda", fake)
    p = S.ground_state(Constant(1.0), Annulus(1.0, 1.5), 0.3)
    assert p.m_star == 0
    assert p.ties == (1,)


def test_argmin_is_non_decreasing_on_annulus():
    table = S.sweep(Constant(1.0), Annulus(1.0, 1.5), np.arange(0, 81) * 0.1)
    assert np.all(np.diff(table.m_star) >= 0)
    assert np.all(table.lambda1 >= 0)


def test_sweep_is_deterministic_across_workers():
    grid = [3.0, 3.5, 4.0, 4.5]
    one = S.sweep(Constant(1.0), Annulus(1.0, 1.2), grid)
    two = S.sweep(Constant(1.0), Annulus(1.0, 1.2), grid, workers=2)
    assert one.points == two.points


def test_sweep_rejects_bad_grids():
    with pytest.raises(DomainError):
        S.sweep(Constant(1.0), Disc(), [])
    with pytest.raises(DomainError):
        S.sweep(Constant(1.0), Disc(), [2.0, 1.0])


def test_refined_ground_state_carries_error_estimate():
    p = S.ground_state(ParabolicWell(1.0), Plane(), 400.0, refine=True)
    assert p.error_estimate is not None and p.error_estimate < 1e-2
    assert abs(p.lambda1 - 400.5) < 0.05


def test_monotonicity_breaks_pairs(make_table):
    t = make_table([1, 2, 3, 4, 5], [1.0, 2.0, 1.5, 1.2, 3.0])
    assert S.monotonicity_breaks(t) == [(2.0, 3.0), (2.0, 4.0), (3.0, 4.0)]
    assert S.monotonicity_breaks(make_table([1, 2, 3], [1.0, 1.0, 2.0])) == []
    with pytest.raises(DomainError):
        S.monotonicity_breaks(make_table([1, 2], [2.0, 1.0]))


@settings(max_examples=60, deadline=None)
@given(values=st.lists(st.floats(-5, 5), min_size=3, max_size=30))
def test_breaks_are_descents(values, make_table):
    B = np.arange(len(values), dtype=float)
    pairs = S.monotonicity_breaks(make_table(B, values))
    lam = dict(zip(B, values))
    assert all(a < b and lam[a] > lam[b] for a, b in pairs)
    descents = any(y < x for x, y in zip(values, values[1:]))
    assert bool(pairs) == descents


def test_oscillation_period_from_transitions(make_table):
    B = np.arange(0, 40, 0.25)
    m = np.floor(B / 9.0).astype(int)
    assert S.oscillation_period(make_table(B, np.zeros_like(B), m)) == pytest.approx(9.0, abs=0.26)
    with pytest.raises(ResolutionError):
        S.oscillation_period(make_table(B, np.zeros_like(B), 2 * m))
    with pytest.raises(ResolutionError):
        S.oscillation_period(make_table(B[:40], np.zeros(40), m[:40]))


def test_fit_recovers_synthetic_oscillation(constants, make_table):
    fld = ParabolicWell(0.05)
    B = 400.0 + 0.25 * np.arange(81)
    root = np.sqrt(fld.delta * B)
    phase = flux(fld) * B + constants.xi0 * root
    amp, c1, c0 = 0.6, 13.0, 0.37
    d2 = np.abs(phase + c0 - np.floor(phase + c0 + 0.5)) ** 2
    lam = constants.theta0 * fld.delta * B + constants.phi0sq / 3 * root + amp * (d2 + c1)
    m = np.floor(phase + c0 + 0.5).astype(int)
    fit = S.asymptotic_fit(make_table(B, lam, m, fld, ExteriorDisc()), "Exterior", constants)
    assert fit.amplitude == pytest.approx(amp, rel=1e-6)
    assert fit.C1 == pytest.approx(c1, rel=1e-6)
    assert fit.C0 == pytest.approx(c0, abs=1e-6)
    assert fit.period == pytest.approx(fit.expected_period, rel=0.05)
    assert max(abs(x) for x in fit.fit_residual) < 1e-9


def test_fit_model_validation(constants, make_table):
    t = make_table([1, 2, 3, 4], [1, 2, 3, 4], fld=ParabolicWell(0.0))
    with pytest.raises(ConfigError):
        S.asymptotic_fit(t, "Interior", constants)
    with pytest.raises(ConfigError):
        S.asymptotic_fit(t, "Sideways", constants)
    with pytest.raises(ConfigError):
        S.asymptotic_fit(t, "AnnulusLimit", constants)


def test_annulus_limit_fit_and_error():
    errs = S.annulus_limit_error(1.0, [1.2, 1.1], 3.0)
    assert errs[1] < errs[0]
    table = S.sweep(Constant(1.0), Annulus(1.0, 1.02), [1.0, 2.0, 3.0])
    fit = S.asymptotic_fit(table, "AnnulusLimit")
    assert fit.max_abs < 0.05


def test_localization_metric_is_a_fraction(constants):
    p = S.ground_state(ParabolicWell(0.05), Disc(), 400.0, constants=constants)
    assert 0.0 <= p.localization_metric < 1e-3
    q = S.ground_state(Constant(1.0), Annulus(1.0, 1.5), 0.0)
    assert math.isfinite(q.localization_metric)


def test_extremely_thin_annulus_stays_finite():
    # Sturm counts lose accuracy as the width shrinks; only finiteness is claimed here
    p = S.ground_state(Constant(1.0), Annulus(1.0, 1.0 + 1e-6), 1.0)
    assert math.isfinite(p.lambda1) and p.lambda1 >= 0
