"""Independent reference computations used to freeze expected values.

Nothing here imports the package's solvers; each oracle works from the
continuum problem directly.
"""

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq


def shooting_eigenvalue_1d(p, length=1.0):
    """First eigenvalue of ``(phi_p(psi'))' + mu phi_p(psi) = 0`` on ``(0, L)``.

    Integrates the first-order system in ``(psi, xi = phi_p(psi'))`` from
    ``psi(0) = 0, psi'(0) = 1`` and brackets the ``mu`` whose first zero of
    ``psi`` lands at ``x = L``.
    """
    q = 1.0 / (p - 1.0)

    def rhs(x, y, mu):
        psi, xi = y
        return [np.sign(xi) * abs(xi) ** q, -mu * np.sign(psi) * abs(psi) ** (p - 1)]

    def psi_end(mu):
        sol = solve_ivp(rhs, (0.0, length), [0.0, 1.0], args=(mu,), rtol=1e-12, atol=1e-14, method="DOP853")
        return sol.y[0, -1]

    # psi(L) > 0 below the eigenvalue, < 0 just above
    lo, hi = 1.0, 2.0
    while psi_end(hi) > 0:
        lo, hi = hi, 2 * hi
    return brentq(psi_end, lo, hi, xtol=1e-13, rtol=1e-14)


def closed_form_eigenvalue_1d(p):
    """From the first integral ``(p-1)|psi'|^p + mu |psi|^p = mu`` on ``(0, 1)``."""
    return (p - 1) * (2 * np.pi / (p * np.sin(np.pi / p))) ** p


def F_one_plus_exp_reference(xi, p):
    """``int_0^xi (1 + e^{-s}) s^{p-1} ds`` by adaptive quadrature."""
    return quad(lambda s: (1 + np.exp(-s)) * s ** (p - 1), 0.0, xi, epsabs=1e-14, epsrel=1e-14)[0]


def energy_sine_reference(p, lam):
    """Continuum energy of ``sin(pi x)`` for ``g = 1 + e^{-xi}`` on ``(0, 1)``."""
    grad = quad(lambda x: abs(np.pi * np.cos(np.pi * x)) ** p, 0, 1, epsabs=1e-13, limit=200)[0]
    reac = quad(lambda x: F_one_plus_exp_reference(np.sin(np.pi * x), p), 0, 1, epsabs=1e-13, limit=200)[0]
    return grad / p - lam * reac


def fem_eigenvalue_square(p, N, maxiter=20000):
    """Principal eigenvalue on the unit square from P1 triangles.

    Minimizes the Rayleigh quotient ``int |grad u|^p / int |u|^p`` over
    piecewise-linear ``u`` on an ``N x N`` criss-cross-free triangulation
    (each square cut along one diagonal) with L-BFGS. The mass term uses the
    three edge-midpoint rule on each triangle.
    """
    from scipy.optimize import minimize

    h = 1.0 / N
    m = N - 1
    idx = -np.ones((N + 1, N + 1), dtype=int)
    idx[1:N, 1:N] = np.arange(m * m).reshape(m, m)
    tris = []
    for i in range(N):
        for j in range(N):
            a, b, c, d = (i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)
            tris.append((a, b, d))
            tris.append((a, d, c))
    tris = np.array(tris)  # (T, 3, 2)
    nodes = idx[tris[..., 0], tris[..., 1]]  # (T, 3), -1 on boundary
    xy = tris * h
    # gradient of barycentric basis per triangle
    e1 = xy[:, 1] - xy[:, 0]
    e2 = xy[:, 2] - xy[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det)
    inv = np.stack([np.stack([e2[:, 1], -e2[:, 0]], 1), np.stack([-e1[:, 1], e1[:, 0]], 1)], 1) / det[:, None, None]
    # grads of phi1, phi2 (rows of inv), phi0 = -(phi1 + phi2)
    gphi = np.stack([-(inv[:, 0] + inv[:, 1]), inv[:, 0], inv[:, 1]], 1)  # (T, 3, 2)

    def expand(u):
        full = np.concatenate([u, [0.0]])
        return full[nodes]  # -1 picks the trailing zero

    def fg(u):
        uv = expand(u)
        grad = np.einsum("tk,tkd->td", uv, gphi)
        gn = np.sqrt(np.sum(grad**2, 1))
        num = np.sum(area * gn**p)
        mids = 0.5 * (uv[:, [0, 1, 2]] + uv[:, [1, 2, 0]])
        den = np.sum(area[:, None] / 3.0 * np.abs(mids) ** p)
        # derivatives w.r.t. the three local nodal values
        dnum = p * area[:, None] * np.einsum("td,tkd->tk", gn[:, None] ** (p - 2) * grad, gphi)
        dm = area[:, None] / 3.0 * p * np.sign(mids) * np.abs(mids) ** (p - 1)
        dden = 0.5 * (dm[:, [0, 1, 2]] + dm[:, [2, 0, 1]])
        dloc = dnum / den - num / den**2 * dden
        g = np.zeros(m * m + 1)
        np.add.at(g, nodes.ravel(), dloc.ravel())
        return num / den, g[:-1]

    x = np.arange(1, N) * h
    u0 = np.outer(np.sin(np.pi * x), np.sin(np.pi * x)).ravel()
    res = minimize(fg, u0, jac=True, method="L-BFGS-B",
                   options={"maxiter": maxiter, "maxfun": 2 * maxiter, "ftol": 1e-15, "gtol": 1e-12})
    return res.fun


def fem_eigenvalue_square_extrapolated(p, levels=(32, 64, 128)):
    vals = [fem_eigenvalue_square(p, N) for N in levels]
    return vals, vals[-1] + (vals[-1] - vals[-2]) / 3.0
