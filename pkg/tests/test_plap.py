import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from oracles import F_one_plus_exp_reference, energy_sine_reference
from plapflow.errors import ConfigError, SolverError
from plapflow.grid import GridFunction, build_grid, seminorm_grad_p
from plapflow.nonlinearity import Nonlinearity, one_plus_exp, power_decay
from plapflow.plap import (SolverControls, apply_p_laplacian, big_F, energy, phi_p, plap_jacobian,
                           plap_jacobian_banded, solve_p_poisson)
from plapflow.spectral import principal_eigenvalue

# int_0^1 (1 + e^-s) s^2 ds = 1/3 + 2 - 5/e
F_AT_ONE_P3 = 1 / 3 + 2 - 5 / np.e


def _random(grid, seed, positive=False):
    rng = np.random.default_rng(seed)
    v = rng.uniform(0.0, 2.0, grid.size) if positive else rng.normal(size=grid.size)
    return GridFunction(grid, v)


def test_phi_p_examples():
    assert phi_p(2.0, 3) == 4.0
    assert phi_p(-2.0, 3) == -4.0
    assert phi_p(0.0, 3.7) == 0.0


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-10, 10), b=st.floats(-10, 10), p=st.floats(2.0, 6.0))
def test_phi_p_odd_increasing(a, b, p):
    assert phi_p(-a, p) == -phi_p(a, p)
    if a < b:
        assert phi_p(a, p) <= phi_p(b, p)


def test_controls_validated():
    with pytest.raises(ValueError):
        SolverControls(damping=0.0)
    with pytest.raises(ValueError):
        SolverControls(tol_residual=-1.0)


def test_apply_zero_and_closed_form():
    g = build_grid(1, 1023)
    assert np.all(apply_p_laplacian(g.zeros(), 3).values == 0)
    x = g.coords[:, 0]
    lap = apply_p_laplacian(g.sample(lambda x: x * (1 - x)), 3).values
    away = np.abs(x - 0.5) > 0.05
    np.testing.assert_allclose(lap[away], -4 * np.abs(1 - 2 * x[away]), rtol=1e-2)


@pytest.mark.parametrize("dim", [1, 2])
@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), c=st.floats(0.01, 100.0))
def test_apply_homogeneous_and_odd(dim, seed, c):
    g = build_grid(dim, 17 if dim == 1 else (6, 7))
    f = _random(g, seed)
    Af = apply_p_laplacian(f, 3.0).values
    np.testing.assert_allclose(apply_p_laplacian(c * f, 3.0).values, c**2 * Af, rtol=1e-10, atol=1e-12 * c**2)
    np.testing.assert_allclose(apply_p_laplacian(-f, 3.0).values, -Af, rtol=0, atol=0)


@pytest.mark.parametrize("dim", [1, 2])
@settings(max_examples=30, deadline=None)
@given(s1=st.integers(0, 2**31), s2=st.integers(0, 2**31), p=st.sampled_from([2.5, 3.0, 4.0]))
def test_apply_monotone(dim, s1, s2, p):
    g = build_grid(dim, 17 if dim == 1 else (6, 7))
    f1, f2 = _random(g, s1), _random(g, s2)
    pairing = np.dot(apply_p_laplacian(f1, p).values - apply_p_laplacian(f2, p).values, f1.values - f2.values)
    assert pairing <= 1e-12 * (1 + np.abs(apply_p_laplacian(f1, p).values).sum())


@pytest.mark.parametrize("dim", [1, 2])
def test_banded_jacobian_matches_sparse(dim):
    g = build_grid(dim, 11 if dim == 1 else (6, 5))
    u = _random(g, 3).values
    J = plap_jacobian(g, u, 3.0, 1e-8).toarray()
    ab, bw = plap_jacobian_banded(g, u, 3.0, 1e-8)
    dense = np.zeros_like(J)
    for i in range(g.size):
        for j in range(max(0, i - bw), min(g.size, i + bw + 1)):
            dense[i, j] = ab[bw + i - j, j]
    np.testing.assert_allclose(dense, J, atol=1e-12 * np.abs(J).max())
    np.testing.assert_allclose(J, J.T, atol=1e-12 * np.abs(J).max())


def test_jacobian_matches_finite_differences():
    g = build_grid(2, (5, 6))
    u = _random(g, 8).values
    J = plap_jacobian(g, u, 3.0, 0.0).toarray()
    d = np.random.default_rng(1).normal(size=g.size)
    eps = 1e-6
    fd = -(apply_p_laplacian(GridFunction(g, u + eps * d), 3.0).values
           - apply_p_laplacian(GridFunction(g, u - eps * d), 3.0).values) / (2 * eps)
    np.testing.assert_allclose(J @ d, fd, rtol=1e-6, atol=1e-6 * np.abs(fd).max())


def test_solve_zero_rhs():
    g = build_grid(1, 63)
    assert np.all(solve_p_poisson(g.zeros(), 3).values == 0)


def test_solve_closed_form():
    g = build_grid(1, 1023)
    u = solve_p_poisson(g.sample(lambda x: 4 * np.abs(1 - 2 * x)), 3)
    exact = g.sample(lambda x: x * (1 - x)).values
    assert np.max(np.abs(u.values - exact)) <= 1e-2 * np.max(exact)


@pytest.mark.parametrize("dim", [1, 2])
def test_solve_scaling(dim):
    g = build_grid(dim, 63 if dim == 1 else 15)
    rhs = _random(g, 5, positive=True)
    u = solve_p_poisson(rhs, 3)
    c = 3.0
    uc = solve_p_poisson(c**2 * rhs, 3)
    np.testing.assert_allclose(uc.values, c * u.values, rtol=1e-6, atol=1e-9 * np.abs(uc.values).max())


@pytest.mark.parametrize("dim,p", [(1, 2.5), (1, 4.0), (2, 3.0)])
def test_solve_round_trip(dim, p):
    g = build_grid(dim, 127 if dim == 1 else 15)
    f = g.sample(lambda *xs: np.prod([np.sin(np.pi * x) * (1 + x) for x in xs], axis=0))
    ctl = SolverControls()
    u = solve_p_poisson(-apply_p_laplacian(f, p), p, ctl)
    res = apply_p_laplacian(u, p).values - apply_p_laplacian(f, p).values
    assert np.linalg.norm(res) <= 10 * ctl.tol_residual * np.linalg.norm(apply_p_laplacian(f, p).values)
    np.testing.assert_allclose(u.values, f.values, atol=1e-6)


def test_solve_failure_reports_residual():
    g = build_grid(1, 255)
    with pytest.raises(SolverError) as info:
        solve_p_poisson(g.ones(), 4.0, SolverControls(tol_residual=1e-14, max_iter=1))
    assert info.value.residual > 0 and info.value.iterations >= 1


def test_big_F_zero_envelope_oracle():
    g = build_grid(1, 15)
    gg = one_plus_exp()
    assert np.all(big_F(gg, g.zeros(), 3).values == 0)
    f = g.sample(lambda x: 5 * x)
    F = big_F(gg, f, 3).values
    assert np.all(F <= 2.0 * f.values**3 / 3 + 1e-15)
    one = big_F(gg, g.ones(), 3).values
    np.testing.assert_allclose(one, F_AT_ONE_P3, atol=1e-8)
    assert F_one_plus_exp_reference(1.0, 3) == pytest.approx(F_AT_ONE_P3, abs=1e-12)
    with pytest.raises(ValueError):
        big_F(gg, -g.ones(), 3)


def test_big_F_quadrature_path():
    # power_decay has no closed form: the adaptive quadrature path is used
    g = build_grid(1, 7)
    gg = power_decay(0.5, 1.0, 2.0)
    f = g.sample(lambda x: 3 * x)
    F = big_F(gg, f, 3.0).values
    ref = [quad(lambda s: (0.5 + (1 + s) ** -2.0) * s**2, 0, xi, epsabs=1e-13)[0] for xi in f.values]
    np.testing.assert_allclose(F, ref, atol=1e-8)


def test_energy_examples():
    gg = one_plus_exp()
    g = build_grid(1, 1023)
    assert energy(g.zeros(), 1.0, gg, 3) == 0.0
    f = g.sample(lambda x: np.sin(np.pi * x))
    assert energy(f, 1.0, gg, 3) == pytest.approx(energy_sine_reference(3, 1.0), rel=1e-2)
    # F <= g0 xi^p / p gives a lower bound
    lower = seminorm_grad_p(f, 3) ** 3 / 3 - 1.0 * 2.0 * g.cell_volume * np.sum(f.values**3) / 3
    assert energy(f, 1.0, gg, 3) >= lower
    with pytest.raises(ValueError):
        energy(-f, 1.0, gg, 3)


@pytest.mark.parametrize("dim", [1, 2])
@pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
def test_energy_gradient_consistency(dim, p):
    # central difference of E along delta equals the residual pairing
    gg = one_plus_exp()
    g = build_grid(dim, 31 if dim == 1 else (7, 8))
    rng = np.random.default_rng(int(10 * p) + dim)
    lam = 20.0
    from plapflow.plap import reaction
    for _ in range(10):
        f = GridFunction(g, rng.uniform(0.2, 1.5, g.size))
        d = rng.normal(size=g.size)
        eps = 1e-5
        fd = (energy(f + GridFunction(g, eps * d), lam, gg, p) - energy(f - GridFunction(g, eps * d), lam, gg, p)) / (
            2 * eps)
        grad = -apply_p_laplacian(f, p).values - reaction(gg, g, f.values, lam, p)
        pairing = g.cell_volume * np.dot(grad, d)
        assert fd == pytest.approx(pairing, rel=1e-6)


def test_nonlinearity_invariants():
    with pytest.raises(ConfigError, match="strictly decreasing"):
        one_plus_exp(1.0, 0.0, 1.0)
    x = build_grid(1, 7).coords
    rising = Nonlinearity("rising", g=lambda x, xi: 1 + xi, g0=lambda x: np.ones(len(x)),
                          ginf=lambda x: np.zeros(len(x)), lipschitz=lambda K: 1.0)
    with pytest.raises(ConfigError, match="decreasing"):
        rising.check(x)
    bad_lip = one_plus_exp(1.0, 1.0, 2.0)
    bad_lip = Nonlinearity("lip", bad_lip.g, bad_lip.g0, bad_lip.ginf, lipschitz=lambda K: 0.5)
    with pytest.raises(ConfigError, match="Lipschitz"):
        bad_lip.check(x)
    assert one_plus_exp().check(x) is not None
    assert power_decay().check(x) is not None


def test_energy_sublevel_bounded():
    # below mu0(g_inf) the energy is coercive: random search under an energy
    # cap saturates; above it the seminorm is unbounded on the same cap
    g = build_grid(1, 63)
    gg = one_plus_exp()
    p = 3.0
    mu_inf = principal_eigenvalue(GridFunction(g, np.ones(g.size)), p).mu0
    rng = np.random.default_rng(0)
    dirs = [g.sine_profile().with_values(g.sine_profile().values * rng.uniform(0.5, 1.5, g.size)) for _ in range(60)]
    scales = np.geomspace(1e-2, 1e3, 60)

    def best(lam, ndirs):
        top = 0.0
        for d in dirs[:ndirs]:
            for s in scales:
                f = s * d
                if energy(f, lam, gg, p) <= 1.0:
                    top = max(top, seminorm_grad_p(f, p))
        return top

    lam_ok = 0.8 * mu_inf
    half, full = best(lam_ok, 30), best(lam_ok, 60)
    assert np.isfinite(full) and full <= 1.1 * half
    assert full < 0.9 * seminorm_grad_p(scales[-1] * dirs[0], p)
    lam_bad = 1.5 * mu_inf
    sine = g.sine_profile()
    energies = [energy(s * sine, lam_bad, gg, p) for s in scales]
    assert energies[-1] < -1e6 and seminorm_grad_p(scales[-1] * sine, p) > 1e3
