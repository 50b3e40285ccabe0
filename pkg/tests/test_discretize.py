import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from scipy.special import jnp_zeros

from magspec import discretize as D
from magspec.eigen import smallest_eigenvalues
from magspec.errors import ConfigError, DomainError, ResolutionError
from magspec.field import Constant, ParabolicWell, flux_potential


def test_domain_validation():
    with pytest.raises(ConfigError):
        D.Annulus(1.5, 1.0)
    with pytest.raises(ConfigError):
        D.Disc(truncation_width_factor=3)
    with pytest.raises(ConfigError):
        D.Domain("torus")
    assert D.parse_domain("annulus:1:1.5") == D.Annulus(1.0, 1.5)
    assert D.parse_domain("exterior") == D.ExteriorDisc()
    assert D.parse_domain("plane", truncation_width_factor=8).truncation_width_factor == 8
    for bad in ("annulus:1", "annulus:a:b", "disc:2", "cube"):
        with pytest.raises(ConfigError):
            D.parse_domain(bad)


def test_grid_is_cell_centred():
    g = D.Grid(1.0, 2.0, 4)
    assert g.h == 0.25
    np.testing.assert_allclose(g.nodes, [1.125, 1.375, 1.625, 1.875])
    np.testing.assert_allclose(g.faces, [1.0, 1.25, 1.5, 1.75, 2.0])


@pytest.mark.parametrize("bcs", [(D.NEUMANN, D.NEUMANN), (D.NEUMANN, D.DIRICHLET),
                                 (D.DIRICHLET, D.DIRICHLET)])
def test_symmetrized_matrix_matches_generalized_problem(bcs):
    grid = D.Grid(0.5, 2.0, 30)
    p = grid.faces
    q = np.cos(grid.nodes) ** 2
    w = grid.nodes
    T = D.sturm_liouville(grid, p, q, w, *bcs)
    h = grid.h
    n = grid.n
    K = np.zeros((n, n))
    for i in range(1, n):
        c = p[i] / h
        K[i - 1, i - 1] += c
        K[i, i] += c
        K[i - 1, i] -= c
        K[i, i - 1] -= c
    if bcs[0] == D.DIRICHLET:
        K[0, 0] += 2 * p[0] / h
    if bcs[1] == D.DIRICHLET:
        K[-1, -1] += 2 * p[-1] / h
    M = np.diag(w * h)
    K += M @ np.diag(q)
    oracle = scipy.linalg.eigh(K, M, eigvals_only=True)
    np.testing.assert_allclose(np.linalg.eigvalsh(T.to_dense()), oracle, rtol=1e-11, atol=1e-11)


def test_disc_neumann_bessel_eigenvalue_converges_at_second_order():
    exact = jnp_zeros(1, 1)[0] ** 2
    errs = []
    for n in (100, 200, 400):
        T = D.build_fiber(D.Disc(), Constant(1.0), 1, 0.0, n)
        errs.append(abs(smallest_eigenvalues(T, 1)[0] - exact))
    assert errs[-1] < 1e-4
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)


def test_zero_field_constant_is_in_kernel():
    T = D.build_fiber(D.Annulus(1.0, 1.5), Constant(1.0), 0, 0.0, 64)
    v = np.sqrt(T.weight)
    assert np.max(np.abs(T.matvec(v))) < 1e-9 * T.norm_inf


def test_potential_matches_flux_potential():
    fld = ParabolicWell(0.05)
    for r in (0.3, 1.0, 1.7):
        direct = (3 / r - 40.0 * flux_potential(fld, r)) ** 2
        assert D.potential(fld, 3, 40.0, r) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(DomainError):
        D.potential(fld, 0, 1.0, 0.0)
    with pytest.raises(DomainError):
        D.potential(fld, 0, -1.0, 1.0)


def test_truncation_windows():
    fld = ParabolicWell(0.05)
    assert D.truncation_window(D.Annulus(1, 1.5), fld, 0.0) == (1, 1.5)
    assert D.truncation_window(D.Disc(), fld, 100.0) == (0.0, 1.0)
    assert D.truncation_window(D.ExteriorDisc(), fld, 400.0) == pytest.approx((1.0, 1.6))
    # delta = 0 uses B^{-1/4}: 12 * 0.1 reaches past the inner cutoff
    assert D.truncation_window(D.Plane(), ParabolicWell(0.0), 10_000.0) == pytest.approx((0.05, 2.2))
    assert D.truncation_window(D.Plane(), ParabolicWell(1.0), 10_000.0) == pytest.approx((0.88, 1.12))
    assert D.truncation_window(D.Plane(), fld, 1.0)[0] == 0.05
    with pytest.raises(DomainError):
        D.truncation_window(D.ExteriorDisc(), fld, 0.0)


def test_resolution_error_reports_minimum():
    with pytest.raises(ResolutionError) as info:
        D.build_fiber(D.Disc(), ParabolicWell(0.05), 10, 500.0, n=30)
    assert info.value.minimum == D.minimum_grid_n(D.Disc(), ParabolicWell(0.05), 500.0)
    assert info.value.exit_code == 4


def test_plane_requires_a_well():
    with pytest.raises(ConfigError):
        D.build_fiber(D.Plane(), Constant(1.0), 0, 10.0)


def test_default_grid_n_bounds():
    for B in (0.0, 1.0, 500.0, 2e4):
        n = D.default_grid_n(D.Disc(), ParabolicWell(0.05), B)
        assert D.MIN_NODES <= n <= D.MAX_NODES
        assert n >= D.minimum_grid_n(D.Disc(), ParabolicWell(0.05), B)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(-5, 15), B=st.floats(0.0, 30.0))
def test_fiber_eigenvalue_sandwich(m, B):
    fld = Constant(1.0)
    T = D.build_fiber(D.Annulus(1.0, 1.5), fld, m, B, 200)
    lam = smallest_eigenvalues(T, 1)[0]
    pot = D.potential(fld, m, B, T.grid.nodes)
    flat = float(np.sum(T.weight * pot) / np.sum(T.weight))
    tol = 1e-9 * max(1.0, T.norm_inf)
    assert T.floor - tol <= lam <= flat + tol
