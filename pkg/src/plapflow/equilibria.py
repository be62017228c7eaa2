"""Positive equilibria ``-Delta_p u = lam g(u) phi_p(u)`` and their branch."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from plapflow.errors import ConfigError, SolverError
from plapflow.grid import Grid, GridFunction, norm_sup, seminorm_grad_p
from plapflow.nonlinearity import Nonlinearity
from plapflow.plap import SolverControls, _check_p, l2, plap, reaction, solve_p_poisson_array
from plapflow.spectral import Thresholds

log = logging.getLogger(__name__)

TRIVIAL_CUTOFF = 1e-6
ESCAPE_SUP = 1e6


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    lam: float
    u: GridFunction
    residual: float  # absolute L2 residual; converged once <= tol * ||reaction||
    iterations: int
    classification: str  # "trivial" | "nontrivial"

    @property
    def nontrivial(self) -> bool:
        return self.classification == "nontrivial"


@dataclass(frozen=True, eq=False)
class BranchSample:
    lam: float
    seminorm: float
    supnorm: float
    residual: float
    iterations: int


@dataclass(eq=False)
class BranchResult:
    samples: list[BranchSample]
    thresholds: Thresholds
    escaped_at: float | None = None
    states: list[GridFunction] = field(default_factory=list, repr=False)


class BranchEscape(SolverError):
    """Continuation left every bounded set (the branch meets infinity)."""

    def __init__(self, lam, supnorm, iterations):
        super().__init__(f"branch escaped at lambda={lam:.6g}", supnorm, iterations)
        self.lam = lam


def _picard(grid, lam, g, p, u, controls, trivial_cutoff, max_iter):
    alpha = controls.damping
    inner = SolverControls(controls.tol_residual * 0.1, controls.max_iter, 1.0, controls.eps_jacobian)
    halvings = 0
    flips = 0
    prev_step = None
    residual = math.inf
    for it in range(1, max_iter + 1):
        f = reaction(g, grid, u, lam, p)
        residual = l2(grid, plap(grid, u, p) + f)
        sup = float(np.max(np.abs(u)))
        if sup < trivial_cutoff:
            return u, residual, it - 1, "trivial"
        # relative to the reaction: a vanishing iterate has a vanishing residual too
        if residual <= controls.tol_residual * l2(grid, f):
            return u, residual, it - 1, "nontrivial"
        if sup > ESCAPE_SUP:
            raise BranchEscape(lam, sup, it)
        target, _, _ = solve_p_poisson_array(grid, f, p, inner, init=u)
        step = target - u
        # oscillation: successive increments pointing against each other
        if prev_step is not None and np.dot(step, prev_step) < 0:
            flips += 1
        else:
            flips = 0
        if flips >= 3:
            if halvings == 4:
                raise SolverError("equilibrium iteration oscillates", residual, it)
            halvings += 1
            alpha *= 0.5
            flips = 0
            log.debug("halving Picard damping to %g at iteration %d", alpha, it)
        prev_step = step
        u = u + alpha * step
    raise SolverError("equilibrium iteration did not converge", residual, max_iter)


def solve_equilibrium(lam: float, g: Nonlinearity, p: float, init: GridFunction,
                      controls: SolverControls | None = None, trivial_cutoff: float = TRIVIAL_CUTOFF,
                      max_iter: int = 20000) -> EquilibriumResult:
    """Damped fixed-point iteration ``u <- (1-a) u + a (-Delta_p)^{-1}(lam g(u) phi_p(u))``.

    The outcome is ``trivial`` once the sup-norm drops below ``trivial_cutoff``.

    Raises:
        SolverError: on non-convergence, persistent oscillation, or escape
            (``BranchEscape``) past a sup-norm of ``1e6``.
    """
    _check_p(p)
    if lam <= 0:
        raise ConfigError("lambda must be positive")
    if np.any(init.values < 0):
        raise ConfigError("initial guess must be non-negative")
    controls = controls or SolverControls()
    u, res, its, kind = _picard(init.grid, lam, g, p, init.values.copy(), controls, trivial_cutoff, max_iter)
    return EquilibriumResult(lam, init.with_values(u), res, its, kind)


def verify_uniqueness(lam: float, g: Nonlinearity, p: float, starts, controls: SolverControls | None = None,
                      **kwargs) -> float:
    """Largest pairwise sup-distance between the equilibria reached from ``starts``.

    Trivial outcomes are included as the zero function.
    """
    sols = []
    for s in starts:
        r = solve_equilibrium(lam, g, p, s, controls, **kwargs)
        sols.append(r.u.values if r.nontrivial else np.zeros_like(r.u.values))
    worst = 0.0
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            worst = max(worst, float(np.max(np.abs(sols[i] - sols[j]))))
    return worst


def default_schedule(th: Thresholds, count: int = 24) -> np.ndarray:
    lo = 1.02 * th.lambda_min
    hi = 0.98 * th.lambda_max if th.finite_max else 4.0 * th.lambda_min
    return np.geomspace(lo, hi, count)


def trace_branch(g: Nonlinearity, p: float, grid: Grid, schedule, th: Thresholds,
                 controls: SolverControls | None = None, keep_states: bool = False) -> BranchResult:
    """Parameter continuation along an increasing ``lambda`` schedule.

    The first solve starts from ``0.1 * psi_min``; each later one is seeded
    with the previous equilibrium. If the iterate escapes (sup-norm above
    ``1e6``) tracing stops and ``escaped_at`` records the offending lambda.

    Raises:
        SolverError: if a solve fails or collapses to the trivial state; the
            message names the failing lambda.
    """
    schedule = np.asarray(schedule, dtype=float)
    if np.any(np.diff(schedule) <= 0):
        raise ConfigError("lambda schedule must be strictly increasing")
    if schedule[0] <= th.lambda_min or schedule[-1] >= th.lambda_max:
        raise ConfigError("lambda schedule must lie inside (lambda_min, lambda_max)")
    result = BranchResult([], th)
    u = 0.1 * th.psi_min
    for lam in schedule:
        try:
            r = solve_equilibrium(float(lam), g, p, u, controls)
        except BranchEscape as exc:
            result.escaped_at = exc.lam
            break
        except SolverError as exc:
            raise SolverError(f"continuation failed at lambda={lam:.6g}: {exc.message}", exc.residual,
                              exc.iterations) from exc
        if not r.nontrivial:
            raise SolverError(f"continuation collapsed to the trivial state at lambda={lam:.6g}", r.residual,
                              r.iterations)
        u = r.u
        result.samples.append(BranchSample(float(lam), seminorm_grad_p(u, p), norm_sup(u), r.residual,
                                           r.iterations))
        if keep_states:
            result.states.append(u)
    return result
