"""Time integration of ``v_t = Delta_p v + lam g(v) phi_p(v)``.

Steps are backward Euler, i.e. the Euler-Lagrange equation of the minimizing
movement ``min_w ||w - v||^2 / (2 dt) + E(w)``. A step is only accepted when
the discrete energy drops by at least ``(1 - eta) ||w - v||^2 / dt``;
otherwise ``dt`` is halved and the step retried.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from plapflow.equilibria import TRIVIAL_CUTOFF
from plapflow.errors import IntegrityError, PreconditionError, SolverError
from plapflow.grid import Grid, GridFunction, seminorm_grad_p
from plapflow.nonlinearity import Nonlinearity, frozen_weight
from plapflow.plap import (SolverControls, _check_p, energy_array, l2, phi_p, plap, plap_jacobian_banded, reaction,
                           solve_band)
from plapflow.spectral import Thresholds, Weight, delta_weight, principal_eigenvalue

log = logging.getLogger(__name__)

DECAYED = "decayed"
CONVERGED = "converged_to_equilibrium"
BLEW_UP = "blew_up"
HORIZON = "horizon_reached"


@dataclass(frozen=True)
class StepControls:
    """Adaptive time-stepping controls.

    ``eta`` is the slack in the per-step dissipation test and
    ``max_rel_change`` caps the relative sup-norm change of one step, which
    keeps the growth phase of a blow-up resolved in time.
    """

    dt_init: float = 1e-4
    dt_min: float = 1e-14
    dt_max: float = 1e4
    blowup_threshold: float = 1e6
    horizon: float = 1e9
    stationarity_tol: float = 1e-8
    equilibrium_rtol: float = 1e-6
    trivial_cutoff: float = TRIVIAL_CUTOFF
    eta: float = 0.1
    max_rel_change: float = 0.5
    growth: float = 1.5
    max_steps: int = 200000
    newton_max_iter: int = 30

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if self.blowup_threshold <= 0 or self.horizon <= 0 or self.stationarity_tol <= 0:
            raise ValueError("blowup_threshold, horizon and stationarity_tol must be positive")


@dataclass(eq=False)
class TrajectoryRecord:
    """Accepted states of one run, one sample per accepted step.

    Per-step arrays are aligned with ``t``; entry 0 is the initial state, for
    which ``dt``, ``rate`` and ``dissipation`` are zero.
    """

    t: list = field(default_factory=list)
    sup_norm: list = field(default_factory=list)
    grad_p_seminorm: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    dt: list = field(default_factory=list)
    rate: list = field(default_factory=list)  # ||v+ - v||_2 / dt
    dissipation: list = field(default_factory=list)  # ||v+ - v||_2^2 / dt
    min_value: list = field(default_factory=list)
    rel_residual: list = field(default_factory=list)
    outcome: str = HORIZON
    t_estimate: float | None = None
    final: GridFunction | None = None
    rejected_steps: int = 0
    controls: StepControls = field(default_factory=StepControls)
    energy_tol: float = 1e-7

    @property
    def samples(self):
        return list(zip(self.t, self.sup_norm, self.grad_p_seminorm, self.energy))

    @property
    def dt_history(self):
        return self.dt[1:]

    def append(self, t, v, grid, p, E, dt, dist2, rel_res):
        self.t.append(float(t))
        self.sup_norm.append(float(np.max(np.abs(v))))
        self.grad_p_seminorm.append(seminorm_grad_p(GridFunction(grid, v), p))
        self.energy.append(float(E))
        self.dt.append(float(dt))
        self.rate.append(math.sqrt(dist2) / dt if dt > 0 else 0.0)
        self.dissipation.append(dist2 / dt if dt > 0 else 0.0)
        self.min_value.append(float(np.min(v)))
        self.rel_residual.append(float(rel_res))


class _System:
    """Everything needed to step one equation on one grid."""

    def __init__(self, grid: Grid, lam: float, g: Nonlinearity, p: float, solver: SolverControls):
        self.grid, self.lam, self.g, self.p, self.solver = grid, lam, g, p, solver
        self.cell = grid.cell_volume
        self.x = grid.coords

    def energy(self, v):
        return energy_array(self.grid, v, self.lam, self.g, self.p)

    def rhs(self, v):
        return plap(self.grid, v, self.p) + reaction(self.g, self.grid, v, self.lam, self.p)

    def rel_residual(self, v):
        reac = reaction(self.g, self.grid, v, self.lam, self.p)
        scale = l2(self.grid, reac)
        if scale == 0.0:
            return 0.0
        return l2(self.grid, plap(self.grid, v, self.p) + reac) / scale

    def at_roundoff(self, v, w, dt, R):
        """Residual no larger than round-off in the terms that make it up."""
        terms = (l2(self.grid, (w - v) / dt) + l2(self.grid, plap(self.grid, w, self.p))
                 + l2(self.grid, reaction(self.g, self.grid, w, self.lam, self.p)))
        return l2(self.grid, R) <= 1e-12 * terms

    def jacobian(self, w, dt):
        p = self.p
        dreac = self.lam * (self.g.derivative(self.x, w) * phi_p(w, p)
                            + self.g(self.x, w) * (p - 1) * np.abs(w) ** (p - 2))
        ab, bw = plap_jacobian_banded(self.grid, w, p, self.solver.eps_jacobian)
        ab[bw] += 1.0 / dt - dreac
        return ab, bw

    def step(self, v, dt, max_iter, guess=None):
        """Backward-Euler step by Newton with a merit line search.

        Returns the new state, or None when Newton fails to converge or
        meets an indefinite Jacobian.
        """
        cell = self.cell

        def merit(w):
            d = w - v
            return 0.5 * cell * np.dot(d, d) / dt + self.energy(w)

        w = v.copy() if guess is None else guess
        R = (w - v) / dt - self.rhs(w)
        phi = merit(w)
        if guess is not None and not merit(v) >= phi:
            w = v.copy()
            R = (w - v) / dt - self.rhs(w)
            phi = merit(w)
        for _ in range(max_iter):
            if not np.any(R):
                return w
            try:
                ab, bw = self.jacobian(w, dt)
                d = -solve_band(ab, bw, R)
            except (ValueError, np.linalg.LinAlgError):
                return None
            if not np.all(np.isfinite(d)):
                return None
            slope = cell * float(np.dot(R, d))
            if slope >= 0:
                return w if self.at_roundoff(v, w, dt, R) else None
            rnorm = l2(self.grid, R)
            alpha = 1.0
            while True:
                trial = w + alpha * d
                Rt = (trial - v) / dt - self.rhs(trial)
                phit = merit(trial)
                if not np.isfinite(phit):
                    pass
                elif phit <= phi + 1e-4 * alpha * slope:
                    break
                elif l2(self.grid, Rt) < 0.5 * rnorm and phit <= phi + 1e-13 * (1 + abs(phi)):
                    break
                alpha *= 0.5
                if alpha < 1e-6:
                    # no measurable merit decrease left: fine if already converged
                    return w if self.at_roundoff(v, w, dt, R) else None
            w, R, phi = trial, Rt, phit
            scale = max(float(np.max(np.abs(w))), 1e-300)
            # a negligible full Newton step means converged, whatever the
            # line search picked among round-off-level merit values
            if np.max(np.abs(d)) <= 1e-11 * scale:
                return w
        return None


def _accept(sys_, v, w, dt, E0, E1, controls):
    """Dissipation, growth and sanity tests on a candidate step."""
    if w is None or not np.all(np.isfinite(w)) or not math.isfinite(E1):
        return False, 0.0
    diff = w - v
    dist2 = sys_.cell * float(np.dot(diff, diff))
    # round-off allowance on the energy difference only
    fuzz = 1e-12 * (abs(E0) + abs(E1) + 1e-300)
    if E1 - E0 > -(1.0 - controls.eta) * dist2 / dt + fuzz:
        return False, dist2
    top = max(float(np.max(np.abs(v))), float(np.max(np.abs(w))))
    if top > 0 and np.max(np.abs(diff)) > controls.max_rel_change * top:
        return False, dist2
    return True, dist2


def step_implicit(v: GridFunction, dt: float, lam: float, g: Nonlinearity, p: float,
                  solver: SolverControls | None = None, controls: StepControls | None = None) -> GridFunction:
    """One backward-Euler step ``v+ - dt (Delta_p v+ + lam g(v+) phi_p(v+)) = v``.

    Raises:
        SolverError: if Newton fails or the step violates the dissipation test;
            the caller is expected to retry with a smaller ``dt``.
    """
    _check_p(p)
    if np.any(v.values < 0):
        raise PreconditionError("step_implicit needs v >= 0")
    solver = solver or SolverControls()
    controls = controls or StepControls()
    sys_ = _System(v.grid, lam, g, p, solver)
    w = sys_.step(v.values, dt, controls.newton_max_iter)
    E0 = sys_.energy(v.values)
    E1 = sys_.energy(w) if w is not None else math.nan
    ok, _ = _accept(sys_, v.values, w, dt, E0, E1, controls)
    if not ok:
        raise SolverError(f"backward-Euler step rejected at dt={dt:.3e}")
    return v.with_values(w)


def _near(a, b):
    return math.isfinite(b) and abs(a - b) <= 1e-9 * abs(b)


def evolve(v0: GridFunction, lam: float, g: Nonlinearity, p: float, controls: StepControls | None = None,
           solver: SolverControls | None = None, thresholds: Thresholds | None = None) -> TrajectoryRecord:
    """Adaptive backward-Euler trajectory with outcome detection.

    Stops at the first of: sup-norm above ``blowup_threshold`` (blew_up),
    sup-norm below ``trivial_cutoff`` (decayed), a stationary near-equilibrium
    state (converged_to_equilibrium) or ``t > horizon`` (horizon_reached).
    When ``thresholds`` are given and ``lam`` equals one of them, the run
    goes to the horizon unclassified.

    Raises:
        PreconditionError: if ``v0`` has negative entries.
        SolverError: if ``dt`` collapses without any sign of blow-up.
    """
    _check_p(p)
    if np.any(v0.values < 0):
        raise PreconditionError("initial data must be non-negative")
    controls = controls or StepControls()
    solver = solver or SolverControls()
    grid = v0.grid
    sys_ = _System(grid, lam, g, p, solver)
    boundary = thresholds is not None and (_near(lam, thresholds.lambda_min) or _near(lam, thresholds.lambda_max))
    rec = TrajectoryRecord(controls=controls, energy_tol=10 * solver.tol_residual)
    v = v0.values.copy()
    E = sys_.energy(v)
    rec.append(0.0, v, grid, p, E, 0.0, 0.0, sys_.rel_residual(v))
    t, dt = 0.0, controls.dt_init
    velocity = None
    for _ in range(controls.max_steps):
        if not boundary:
            label = _live_label(rec)
            if label is not None:
                rec.outcome = label
                break
        if t >= controls.horizon:
            rec.outcome = HORIZON
            break
        dt = min(dt, controls.dt_max)
        guess = None if velocity is None else v + dt * velocity
        w = sys_.step(v, dt, controls.newton_max_iter, guess)
        E1 = sys_.energy(w) if w is not None else math.nan
        ok, dist2 = _accept(sys_, v, w, dt, E, E1, controls)
        if not ok:
            rec.rejected_steps += 1
            dt *= 0.5
            if dt < controls.dt_min:
                if _growing(rec):
                    rec.outcome = BLEW_UP
                    break
                raise SolverError(f"time step collapsed at t={t:.6g} without blow-up", rec.rel_residual[-1],
                                  len(rec.t))
            continue
        t += dt
        velocity = (w - v) / dt
        v, E = w, E1
        rec.append(t, v, grid, p, E, dt, dist2, sys_.rel_residual(v))
        dt *= controls.growth
    else:
        rec.outcome = HORIZON
    if rec.outcome == BLEW_UP:
        rec.t_estimate = rec.t[-1]
    rec.final = GridFunction(grid, v)
    return rec


def _growing(rec: TrajectoryRecord, window: int = 5) -> bool:
    s = rec.sup_norm[-window:]
    return len(s) == window and all(b > a for a, b in zip(s, s[1:])) and s[-1] > 10 * rec.sup_norm[0]


def _live_label(rec: TrajectoryRecord):
    c = rec.controls
    sup = rec.sup_norm[-1]
    if sup > c.blowup_threshold:
        return BLEW_UP
    if sup < c.trivial_cutoff:
        return DECAYED
    if len(rec.t) > 1 and rec.rate[-1] < c.stationarity_tol and rec.rel_residual[-1] < c.equilibrium_rtol:
        return CONVERGED
    return None


def classify_asymptotics(traj: TrajectoryRecord, e_candidate: GridFunction | None = None,
                         tol: float | None = None) -> str:
    """Re-derive the outcome label of a finished trajectory from its samples.

    With ``e_candidate`` a converged label additionally needs the final state
    within ``tol`` (default ``10 * stationarity_tol``... floored at 1e-6) of
    it in sup-norm.

    Raises:
        IntegrityError: if the energy increases by more than the trajectory's
            energy tolerance between samples.
    """
    E = np.asarray(traj.energy)
    if E.size > 1 and np.max(np.diff(E)) > traj.energy_tol:
        raise IntegrityError(f"energy increased by {np.max(np.diff(E)):.3e} along the trajectory")
    if not traj.t:
        return HORIZON
    c = traj.controls
    sup = np.asarray(traj.sup_norm)
    if np.all(sup == 0.0) or sup[-1] < c.trivial_cutoff:
        return DECAYED
    if sup[-1] > c.blowup_threshold or (traj.outcome == BLEW_UP and _growing(traj)):
        dts = np.asarray(traj.dt_history)
        if dts.size and dts[-1] < np.max(dts):
            return BLEW_UP
    if traj.rate[-1] < c.stationarity_tol and traj.rel_residual[-1] < c.equilibrium_rtol:
        if e_candidate is None:
            return CONVERGED
        tol = tol if tol is not None else max(10 * c.stationarity_tol, 1e-6)
        if traj.final is not None and float(np.max(np.abs(traj.final.values - e_candidate.values))) <= tol:
            return CONVERGED
    return HORIZON


# comparison and probes ------------------------------------------------------

@dataclass
class ComparisonReport:
    max_violation: float  # max over shared times and nodes of (w - v)+
    min_v: float
    min_w: float
    t_final: float
    v_blew_up: bool
    w_blew_up: bool
    steps: int
    rejected_steps: int

    @property
    def v_no_later(self) -> bool:
        """``v`` blew up no later than ``w`` (vacuous when ``w`` did not)."""
        return self.v_blew_up or not self.w_blew_up


def compare_evolutions(v0: GridFunction, w0: GridFunction, gamma, lam: float, g: Nonlinearity, p: float,
                       controls: StepControls | None = None, solver: SolverControls | None = None,
                       horizon: float | None = None) -> ComparisonReport:
    """Co-evolve the full problem from ``v0`` and the frozen-weight problem
    ``w_t = Delta_p w + lam gamma phi_p(w)`` from ``w0`` on one time grid.

    Raises:
        PreconditionError: unless ``g_inf >= gamma >= 0`` and ``v0 >= w0 >= 0``.
    """
    _check_p(p)
    grid = v0.grid
    gam = gamma.values.values if isinstance(gamma, Weight) else np.asarray(
        gamma.values if isinstance(gamma, GridFunction) else gamma, dtype=float)
    if np.any(gam < 0) or np.any(gam > g.ginf(grid.coords) * (1 + 1e-14)):
        raise PreconditionError("need g_inf >= gamma >= 0")
    if np.any(w0.values < 0) or np.any(v0.values < w0.values):
        raise PreconditionError("need v0 >= w0 >= 0")
    controls = controls or StepControls()
    solver = solver or SolverControls()
    horizon = controls.horizon if horizon is None else horizon
    full = _System(grid, lam, g, p, solver)
    aux = _System(grid, lam, frozen_weight(gam), p, solver)
    v, w = v0.values.copy(), w0.values.copy()
    Ev, Ew = full.energy(v), aux.energy(w)
    viol = max(0.0, float(np.max(w - v)))
    min_v, min_w = float(np.min(v)), float(np.min(w))
    t, dt, steps, rejected = 0.0, controls.dt_init, 0, 0
    v_up = w_up = False
    while t < horizon and steps < controls.max_steps:
        dt = min(dt, controls.dt_max)
        if t + dt > horizon:
            dt = max(horizon - t, controls.dt_min)
        vn = full.step(v, dt, controls.newton_max_iter)
        wn = aux.step(w, dt, controls.newton_max_iter) if vn is not None else None
        Evn = full.energy(vn) if vn is not None else math.nan
        Ewn = aux.energy(wn) if wn is not None else math.nan
        ok_v, _ = _accept(full, v, vn, dt, Ev, Evn, controls)
        ok_w, _ = _accept(aux, w, wn, dt, Ew, Ewn, controls) if ok_v else (False, 0.0)
        if not (ok_v and ok_w):
            rejected += 1
            dt *= 0.5
            if dt < controls.dt_min:
                # a collapse at large amplitude is the blow-up of whichever grew
                v_up = float(np.max(v)) > 10 * float(np.max(v0.values))
                w_up = float(np.max(w)) > 10 * max(float(np.max(w0.values)), 1e-300)
                break
            continue
        t += dt
        steps += 1
        rate = max(l2(grid, vn - v), l2(grid, wn - w)) / dt
        v, w, Ev, Ew = vn, wn, Evn, Ewn
        viol = max(viol, float(np.max(w - v)))
        min_v, min_w = min(min_v, float(np.min(v))), min(min_w, float(np.min(w)))
        v_up = float(np.max(v)) > controls.blowup_threshold
        w_up = float(np.max(w)) > controls.blowup_threshold
        if v_up or w_up:
            break
        if rate < controls.stationarity_tol:
            break
        dt *= controls.growth
    return ComparisonReport(viol, min_v, min_w, t, v_up, w_up, steps, rejected)


@dataclass
class ProbeReport:
    outcome: str
    mu0: float
    record: TrajectoryRecord
    flagged: bool = False  # expected blow-up did not happen
    escaped: bool | None = None
    t_escape: float | None = None
    mu_delta: float | None = None


def blowup_probe(gamma, lam: float, w0: GridFunction, p: float, controls: StepControls | None = None,
                 solver: SolverControls | None = None, margin: float = 1e-3) -> ProbeReport:
    """Evolve the frozen-weight problem and report whether it blows up.

    For ``lam > (1 + margin) mu0(gamma)`` anything but blow-up is flagged.
    Below the eigenvalue the probe serves as a negative control.
    """
    gamma = gamma if isinstance(gamma, Weight) else Weight(gamma)
    if not np.any(w0.values > 0):
        raise PreconditionError("blow-up probe needs non-zero initial data")
    mu0 = principal_eigenvalue(gamma, p, solver).mu0
    rec = evolve(w0, lam, frozen_weight(gamma.values.values), p, controls, solver)
    flagged = lam > (1 + margin) * mu0 and rec.outcome != BLEW_UP
    return ProbeReport(rec.outcome, mu0, rec, flagged)


def trivial_instability_probe(lam: float, g: Nonlinearity, p: float, delta: float, th: Thresholds,
                              controls: StepControls | None = None, solver: SolverControls | None = None,
                              ) -> ProbeReport:
    """Check that small positive data leaves the ``delta``-ball around 0.

    Starts from ``(delta / 4) psi_min`` and records when the sup-norm first
    exceeds ``delta``; the run continues to its own outcome.

    Raises:
        PreconditionError: if ``lam <= lambda_min`` or ``lam <= mu0(g_delta)``.
    """
    if lam <= th.lambda_min:
        raise PreconditionError("no admissible delta: lambda must exceed lambda_min")
    grid = th.psi_min.grid
    mu_delta = principal_eigenvalue(delta_weight(g, grid, delta), p, solver).mu0
    if lam <= mu_delta:
        raise PreconditionError(
            f"lambda={lam:.6g} <= mu0(g_delta)={mu_delta:.6g}; try delta={delta / 10:g}")
    rec = evolve((delta / 4.0) * th.psi_min, lam, g, p, controls, solver, th)
    sup = np.asarray(rec.sup_norm)
    over = np.nonzero(sup > delta)[0]
    escaped = over.size > 0
    t_escape = rec.t[over[0]] if escaped else None
    return ProbeReport(rec.outcome, th.lambda_min, rec, not escaped, escaped, t_escape, mu_delta)
