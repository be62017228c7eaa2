"""Discrete p-Laplacian in flux form, its inverse, and the energy functional.

The discrete operator is defined as the exact negative gradient of the
discrete gradient energy ``(1/p) * sum_edges w * |grad u|_e**p`` divided by
the nodal quadrature weight. In 1D this is the classical three-point flux
stencil ``(phi_p(Du)_{i+1/2} - phi_p(Du)_{i-1/2}) / h``. In 2D each edge also
carries an averaged tangential derivative, and the resulting fluxes are
distributed back through both the normal and the tangential difference
operators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad_vec
from scipy.linalg import solve_banded

from plapflow.errors import SolverError
from plapflow.grid import Grid, GridFunction, edge_gradients, edge_operators, norm_Lq, seminorm_grad_p
from plapflow.nonlinearity import Nonlinearity

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverControls:
    """Controls for the nonlinear solvers.

    ``tol_residual`` bounds the discrete L2 norm of the PDE residual relative
    to the L2 norm of the source term, so it means the same thing for tiny
    and for huge solutions.
    ``eps_jacobian`` regularizes ``|Du|**(p-2)`` in Jacobians only.
    """

    tol_residual: float = 1e-8
    max_iter: int = 100
    damping: float = 0.5
    eps_jacobian: float = 1e-8

    def __post_init__(self):
        if self.tol_residual <= 0 or self.max_iter < 1:
            raise ValueError("tol_residual must be positive and max_iter >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.eps_jacobian < 0:
            raise ValueError("eps_jacobian must be non-negative")


def phi_p(s, p):
    """``|s|**(p-1) * sign(s)``."""
    s = np.asarray(s, dtype=float)
    return np.sign(s) * np.abs(s) ** (p - 1)


def _check_p(p):
    if not p >= 2:
        raise ValueError(f"p must be at least 2, got {p}")


# array-level kernels -------------------------------------------------------

def grad_energy(grid: Grid, u: np.ndarray, p: float) -> float:
    """``(1/p) * ||grad u||_p**p`` on the edge quadrature."""
    fams = edge_operators(grid).families
    return sum(np.dot(fam.weight, m**p) for fam, (_, _, m) in zip(fams, edge_gradients(grid, u))) / p


def plap(grid: Grid, u: np.ndarray, p: float) -> np.ndarray:
    """Array version of :func:`apply_p_laplacian`."""
    ops = edge_operators(grid)
    out = np.zeros_like(u)
    for fam, (dn, dt, mag) in zip(ops.families, edge_gradients(grid, u)):
        flux = fam.weight * mag ** (p - 2)
        out -= fam.normal.T @ (flux * dn)
        if fam.tangential is not None:
            out -= fam.tangential.T @ (flux * dt)
    return out / grid.cell_volume


def _edge_coefficients(grid, u, p, eps):
    """Per-family Hessian coefficients ``(nn, nt, tt)`` of the gradient energy."""
    out = []
    for fam, (dn, dt, mag) in zip(edge_operators(grid).families, edge_gradients(grid, u)):
        r2 = mag**2 + eps**2
        base = r2 ** ((p - 2) / 2)
        extra = (p - 2) * r2 ** ((p - 4) / 2) if p != 2 else np.zeros_like(r2)
        w = fam.weight / grid.cell_volume
        out.append((w * (base + extra * dn**2), w * extra * dn * dt, w * (base + extra * dt**2)))
    return out


def plap_jacobian(grid: Grid, u: np.ndarray, p: float, eps: float) -> sp.csc_matrix:
    """Hessian of the gradient energy divided by the nodal weight.

    This is the Jacobian of ``-plap`` with ``|grad u|**(p-2)`` replaced by
    ``(|grad u|**2 + eps**2)**((p-2)/2)``; symmetric positive definite.
    """
    hess = sp.csr_matrix((grid.size, grid.size))
    for fam, (nn, nt, tt) in zip(edge_operators(grid).families, _edge_coefficients(grid, u, p, eps)):
        N = fam.normal
        hess = hess + N.T @ sp.diags(nn) @ N
        if fam.tangential is not None:
            T = fam.tangential
            cross = N.T @ sp.diags(nt) @ T
            hess = hess + cross + cross.T + T.T @ sp.diags(tt) @ T
    return hess.tocsc()


class BandedPattern:
    """Scatter map from edge coefficients to LAPACK banded storage.

    Precomputes, for every product ``A_e^T c_e B_e`` appearing in the
    Hessian, where each entry lands in the ``(2 bw + 1, size)`` band array.
    """

    def __init__(self, grid: Grid):
        n = grid.size
        pieces = []  # (flat slot, value, coefficient index)
        offset = 0
        bw = 0
        for fam in edge_operators(grid).families:
            E = fam.normal.shape[0]
            mats = [_padded_rows(fam.normal)]
            if fam.tangential is not None:
                mats.append(_padded_rows(fam.tangential))
            # coefficient blocks: nn at offset, nt at offset+E, tt at offset+2E
            combos = [(0, 0, 0)]
            if len(mats) == 2:
                combos += [(0, 1, 1), (1, 0, 1), (1, 1, 2)]
            for ia, ib, kind in combos:
                ca, va = mats[ia]
                cb, vb = mats[ib]
                for k in range(ca.shape[1]):
                    for m in range(cb.shape[1]):
                        val = va[:, k] * vb[:, m]
                        keep = val != 0
                        i, j = ca[keep, k], cb[keep, m]
                        bw = max(bw, int(np.max(np.abs(i - j), initial=0)))
                        pieces.append((i, j, val[keep], offset + kind * E + np.nonzero(keep)[0]))
            offset += 3 * E
        self.bw = bw
        self.size = n
        i = np.concatenate([q[0] for q in pieces])
        j = np.concatenate([q[1] for q in pieces])
        self.slot = (bw + i - j) * n + j
        self.val = np.concatenate([q[2] for q in pieces])
        self.coef_index = np.concatenate([q[3] for q in pieces])
        self.diag_slot = bw * n + np.arange(n)

    def assemble(self, coefs):
        """Band array for the coefficient list from ``_edge_coefficients``."""
        flat = np.concatenate([np.concatenate(c) for c in coefs])
        data = np.bincount(self.slot, weights=self.val * flat[self.coef_index],
                           minlength=(2 * self.bw + 1) * self.size)
        return data.reshape(2 * self.bw + 1, self.size)


def _padded_rows(mat):
    """Column indices and values of each row, padded to a common width."""
    mat = sp.csr_matrix(mat)
    counts = np.diff(mat.indptr)
    width = max(int(counts.max(initial=0)), 1)
    cols = np.zeros((mat.shape[0], width), dtype=np.int64)
    vals = np.zeros((mat.shape[0], width))
    for r in range(mat.shape[0]):
        lo, hi = mat.indptr[r], mat.indptr[r + 1]
        cols[r, : hi - lo] = mat.indices[lo:hi]
        vals[r, : hi - lo] = mat.data[lo:hi]
    return cols, vals


_PATTERNS: dict[Grid, BandedPattern] = {}


def banded_pattern(grid: Grid) -> BandedPattern:
    pat = _PATTERNS.get(grid)
    if pat is None:
        pat = _PATTERNS[grid] = BandedPattern(grid)
    return pat


def plap_jacobian_banded(grid: Grid, u: np.ndarray, p: float, eps: float):
    """Band storage ``(ab, bw)`` of :func:`plap_jacobian`."""
    pat = banded_pattern(grid)
    return pat.assemble(_edge_coefficients(grid, u, p, eps)), pat.bw


def solve_band(ab, bw, rhs):
    return solve_banded((bw, bw), ab, rhs, overwrite_ab=True, check_finite=False)


def l2(grid: Grid, v: np.ndarray) -> float:
    return float(np.sqrt(grid.cell_volume * np.dot(v, v)))


def _ray_scaled_guess(grid, rhs, p):
    w = _preconditioned_descent(grid, rhs)
    work = grid.cell_volume * float(np.dot(rhs, w))
    stiff = p * grad_energy(grid, w, p)
    if work <= 0 or stiff <= 0:
        return np.zeros(grid.size)
    # minimizer of J(c w) = c**p stiff / p - c work
    return (work / stiff) ** (1.0 / (p - 1)) * w


def solve_p_poisson_array(grid, rhs, p, controls, init=None):
    """Minimize ``(1/p)||grad u||_p**p - <rhs, u>`` by damped Newton.

    Returns ``(u, residual, iterations)`` with residual the discrete L2 norm
    of ``plap(u) + rhs``.
    """
    rhs = np.asarray(rhs, dtype=float)
    cell = grid.cell_volume
    tol = controls.tol_residual * l2(grid, rhs)
    if not np.any(rhs):
        return np.zeros(grid.size), 0.0, 0
    u = _ray_scaled_guess(grid, rhs, p) if init is None else np.array(init, dtype=float)

    def objective(v):
        return grad_energy(grid, v, p) - cell * np.dot(rhs, v)

    res = plap(grid, u, p) + rhs
    rnorm = l2(grid, res)
    J = objective(u)
    for it in range(1, controls.max_iter + 1):
        if rnorm <= tol:
            return u, rnorm, it - 1
        gradJ = -cell * res
        try:
            ab, bw = plap_jacobian_banded(grid, u, p, controls.eps_jacobian)
            d = solve_band(ab, bw, res)
        except (ValueError, np.linalg.LinAlgError):
            d = None
        if d is None or not np.all(np.isfinite(d)) or np.dot(gradJ, d) >= 0:
            d = _preconditioned_descent(grid, res)
        slope = float(np.dot(gradJ, d))
        alpha, accepted = 1.0, False
        while alpha > 1e-12:
            trial = u + alpha * d
            Jt = objective(trial)
            rest = plap(grid, trial, p) + rhs
            rt = l2(grid, rest)
            # the energy test alone stalls once J changes at round-off level
            if Jt <= J + 1e-4 * alpha * slope or (rt < 0.5 * rnorm and Jt <= J + 1e-12 * (1 + abs(J))):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise SolverError("p-Poisson line search failed", rnorm, it)
        u, res, rnorm, J = trial, rest, rt, Jt
    if rnorm <= tol:
        return u, rnorm, controls.max_iter
    raise SolverError("p-Poisson solve did not converge", rnorm, controls.max_iter)


def _preconditioned_descent(grid, res):
    ab, bw = plap_jacobian_banded(grid, np.zeros(grid.size), 2.0, 0.0)
    return solve_band(ab, bw, res)


# public operations ---------------------------------------------------------

def apply_p_laplacian(f: GridFunction, p: float) -> GridFunction:
    _check_p(p)
    return f.with_values(plap(f.grid, f.values, p))


def solve_p_poisson(rhs: GridFunction, p: float, controls: SolverControls | None = None,
                    init: GridFunction | None = None) -> GridFunction:
    """Solve ``-Delta_p u = rhs`` with zero Dirichlet data.

    Raises:
        SolverError: if the residual tolerance is not met within ``max_iter``.
    """
    _check_p(p)
    controls = controls or SolverControls()
    u, _, _ = solve_p_poisson_array(
        rhs.grid, rhs.values, p, controls, None if init is None else init.values
    )
    return rhs.with_values(u)


def big_F_array(g: Nonlinearity, grid: Grid, xi: np.ndarray, p: float) -> np.ndarray:
    """``F(x, xi)`` at every node; negative ``xi`` uses the even extension of g."""
    x = grid.coords
    xi = np.asarray(xi, dtype=float)
    mag = np.abs(xi)
    if g.F is not None:
        pos = g.F(x, np.maximum(xi, 0.0), p)
    else:
        pos = _quad_F(g, x, np.maximum(xi, 0.0), p)
    neg = g.g0(x) * mag**p / p
    return np.where(xi < 0.0, neg, pos)


def _quad_F(g, x, xi, p):
    if not np.any(xi):
        return np.zeros_like(xi)

    def integrand(t):
        s = t * xi
        return xi * g(x, s) * s ** (p - 1)

    val, _ = quad_vec(integrand, 0.0, 1.0, epsabs=1e-12, epsrel=1e-11, norm="max")
    return val


def big_F(g: Nonlinearity, f: GridFunction, p: float) -> GridFunction:
    """Nodewise ``F(x, f(x)) = int_0^f g(x, s) s**(p-1) ds``."""
    if np.any(f.values < 0):
        raise ValueError("big_F requires a non-negative grid function")
    return f.with_values(big_F_array(g, f.grid, f.values, p))


def energy_array(grid, u, lam, g, p):
    return grad_energy(grid, u, p) - lam * grid.cell_volume * float(np.sum(big_F_array(g, grid, u, p)))


def energy(f: GridFunction, lam: float, g: Nonlinearity, p: float) -> float:
    """``(1/p)||grad f||_p**p - lam * int F(x, f)``."""
    if np.any(f.values < 0):
        raise ValueError("energy requires a non-negative grid function")
    _check_p(p)
    return energy_array(f.grid, f.values, lam, g, p)


def reaction(g: Nonlinearity, grid: Grid, u: np.ndarray, lam: float, p: float) -> np.ndarray:
    """``lam * g(x, u) * phi_p(u)``."""
    return lam * g(grid.coords, u) * phi_p(u, p)


def pde_residual(f: GridFunction, lam: float, g: Nonlinearity, p: float) -> float:
    """Discrete L2 norm of ``Delta_p f + lam g(f) phi_p(f)``."""
    r = plap(f.grid, f.values, p) + reaction(g, f.grid, f.values, lam, p)
    return l2(f.grid, r)


__all__ = [
    "SolverControls", "phi_p", "apply_p_laplacian", "solve_p_poisson", "big_F", "energy",
    "seminorm_grad_p", "norm_Lq", "pde_residual",
]
