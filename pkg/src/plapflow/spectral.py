"""Principal eigenpair of ``-Delta_p psi = mu rho phi_p(psi)`` and the
bifurcation thresholds derived from it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from plapflow.errors import ConfigError, SolverError
from plapflow.grid import Grid, GridFunction, seminorm_grad_p
from plapflow.nonlinearity import Nonlinearity
from plapflow.plap import SolverControls, _check_p, l2, phi_p, plap, solve_p_poisson_array


@dataclass(frozen=True, eq=False)
class Weight:
    values: GridFunction

    def __post_init__(self):
        v = self.values.values
        if np.any(v < 0):
            raise ConfigError("weight must be non-negative")
        if not np.any(v > 0):
            raise ConfigError("weight must be positive at one node at least")

    @property
    def grid(self) -> Grid:
        return self.values.grid

    def __mul__(self, c):
        return Weight(self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class EigenResult:
    mu0: float
    psi0: GridFunction
    residual: float
    iterations: int


@dataclass(frozen=True, eq=False)
class Thresholds:
    lambda_min: float
    lambda_max: float  # math.inf when g_inf vanishes identically
    psi_min: GridFunction
    psi_max: GridFunction | None

    @property
    def finite_max(self) -> bool:
        return math.isfinite(self.lambda_max)

    @property
    def mid(self) -> float:
        if not self.finite_max:
            raise ValueError("mid-point undefined when lambda_max is infinite")
        return 0.5 * (self.lambda_min + self.lambda_max)


def as_weight(rho) -> Weight:
    return rho if isinstance(rho, Weight) else Weight(rho)


def rayleigh_quotient(w: GridFunction, rho, p: float) -> float:
    """``||grad w||_p**p / int rho |w|**p``."""
    rho = as_weight(rho)
    den = w.grid.cell_volume * float(np.sum(rho.values.values * np.abs(w.values) ** p))
    if den <= 0:
        raise ValueError("Rayleigh quotient denominator vanishes")
    return seminorm_grad_p(w, p) ** p / den


def principal_eigenvalue(rho, p: float, controls: SolverControls | None = None,
                         init: GridFunction | None = None, mu_rtol: float = 1e-8) -> EigenResult:
    """Inverse power iteration in the positive cone.

    Each step solves ``-Delta_p psi_new = rho phi_p(psi)``, normalizes to unit
    sup-norm and reports the Rayleigh quotient. Stops when the eigen-residual
    is below tolerance and ``mu`` has settled to ``mu_rtol``.

    Raises:
        SolverError: on non-convergence or loss of positivity.
    """
    _check_p(p)
    rho = as_weight(rho)
    controls = controls or SolverControls()
    grid = rho.grid
    r = rho.values.values
    psi = (grid.sine_profile() if init is None else init).values
    psi = psi / np.max(np.abs(psi))
    mu_old = math.inf
    # inner solves run tighter than the outer stopping test
    inner = SolverControls(controls.tol_residual * 0.1, controls.max_iter, controls.damping,
                           controls.eps_jacobian)
    warm = None
    residual = math.inf
    for it in range(1, 20 * controls.max_iter + 1):
        nxt, _, _ = solve_p_poisson_array(grid, r * phi_p(psi, p), p, inner, init=warm)
        scale = np.max(np.abs(nxt))
        if not scale > 0 or np.min(nxt) <= 0:
            raise SolverError("eigenfunction iterate left the positive cone", residual, it)
        psi = nxt / scale
        # next solve's answer is roughly psi scaled by the current growth
        warm = psi * scale
        mu = rayleigh_quotient(GridFunction(grid, psi), rho, p)
        rhs = mu * r * phi_p(psi, p)
        residual = l2(grid, plap(grid, psi, p) + rhs)
        settled = abs(mu - mu_old) <= mu_rtol * mu
        if settled and residual <= controls.tol_residual * l2(grid, rhs):
            return EigenResult(mu, GridFunction(grid, psi), residual, it)
        mu_old = mu
    raise SolverError("inverse power iteration did not converge", residual, it)


def thresholds(g: Nonlinearity, p: float, grid: Grid, controls: SolverControls | None = None) -> Thresholds:
    """``lambda_min = mu0(g_0)`` and ``lambda_max = mu0(g_inf)`` (inf if ``g_inf == 0``)."""
    x = grid.coords
    g.check(x)
    lo = principal_eigenvalue(Weight(GridFunction(grid, g.g0(x))), p, controls)
    ginf = np.asarray(g.ginf(x), dtype=float)
    if not np.any(ginf > 0):
        return Thresholds(lo.mu0, math.inf, lo.psi0, None)
    hi = principal_eigenvalue(Weight(GridFunction(grid, ginf)), p, controls)
    if not lo.mu0 < hi.mu0:
        raise SolverError("computed thresholds are not ordered", abs(hi.mu0 - lo.mu0), 0)
    return Thresholds(lo.mu0, hi.mu0, lo.psi0, hi.psi0)


def delta_weight(g: Nonlinearity, grid: Grid, delta: float) -> Weight:
    """``g_delta(x) = g(x, delta)`` sampled at the nodes."""
    x = grid.coords
    return Weight(GridFunction(grid, g(x, np.full(grid.size, float(delta)))))
