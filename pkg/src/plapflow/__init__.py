"""Finite-difference p-Laplacian reaction-diffusion toolkit.

Principal eigenvalues, positive equilibria and their branch, and the
backward-Euler gradient flow of ``v_t = Delta_p v + lam g(v) phi_p(v)`` with
homogeneous Dirichlet data on the unit interval or unit square.
"""

from plapflow.dynamics import (StepControls, TrajectoryRecord, blowup_probe, classify_asymptotics,
                               compare_evolutions, evolve, step_implicit, trivial_instability_probe)
from plapflow.equilibria import solve_equilibrium, trace_branch, verify_uniqueness
from plapflow.errors import ConfigError, IntegrityError, PreconditionError, SolverError
from plapflow.grid import Grid, GridFunction, build_grid, norm_Lq, norm_sup, seminorm_grad_p
from plapflow.nonlinearity import Nonlinearity, one_plus_exp, power_decay
from plapflow.plap import SolverControls, apply_p_laplacian, big_F, energy, pde_residual, solve_p_poisson
from plapflow.spectral import Thresholds, Weight, principal_eigenvalue, rayleigh_quotient, thresholds

__all__ = [
    "ConfigError", "Grid", "GridFunction", "IntegrityError", "Nonlinearity", "PreconditionError",
    "SolverControls", "SolverError", "StepControls", "Thresholds", "TrajectoryRecord", "Weight",
    "apply_p_laplacian", "big_F", "blowup_probe", "build_grid", "classify_asymptotics", "compare_evolutions",
    "energy", "evolve", "norm_Lq", "norm_sup", "one_plus_exp", "pde_residual", "power_decay",
    "principal_eigenvalue", "rayleigh_quotient", "seminorm_grad_p", "solve_equilibrium", "solve_p_poisson",
    "step_implicit", "thresholds", "trace_branch", "trivial_instability_probe", "verify_uniqueness",
]
