"""Reaction coefficients ``g(x, xi)``: positive, strictly decreasing in ``xi``.

Callables take node coordinates ``x`` of shape ``(N, dim)`` and values ``xi``
of shape ``(N,)``. Negative ``xi`` is never passed to ``g`` directly; the
package extends ``g(x, -xi) = g(x, 0)`` as needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from plapflow.errors import ConfigError


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Reaction coefficient with its limits at zero and infinity.

    Attributes:
        g: ``g(x, xi)``.
        g0: ``g(x, 0)``.
        ginf: ``lim g(x, xi)`` as ``xi -> inf``, supplied analytically.
        lipschitz: ``K -> L_K``, a Lipschitz bound of ``g(x, .)`` on ``[0, K]``.
        dg: optional ``d g / d xi``; central differences are used when absent.
        F: optional closed form of ``F(x, xi, p) = int_0^xi g(x,s) s**(p-1) ds``.
    """

    name: str
    g: Callable
    g0: Callable
    ginf: Callable
    lipschitz: Callable[[float], float]
    dg: Callable | None = None
    F: Callable | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, x, xi):
        xi = np.maximum(np.asarray(xi, dtype=float), 0.0)
        return self.g(x, xi)

    def derivative(self, x, xi):
        """``d g / d xi``, zero on the constant extension to ``xi < 0``."""
        xi = np.asarray(xi, dtype=float)
        pos = np.maximum(xi, 0.0)
        if self.dg is not None:
            d = self.dg(x, pos)
        else:
            step = 1e-6 * (1.0 + pos)
            lo = np.maximum(pos - step, 0.0)
            d = (self.g(x, pos + step) - self.g(x, lo)) / (pos + step - lo)
        return np.where(xi < 0.0, 0.0, d)

    def check(self, x, xi_max=10.0, n_xi=41):
        """Spot-check positivity, strict decrease, limits and Lipschitz bound.

        Raises:
            ConfigError: naming the violated property.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        xis = np.linspace(0.0, xi_max, n_xi)
        vals = np.stack([self.g(x, np.full(len(x), s)) for s in xis])
        if np.any(vals <= 0.0):
            raise ConfigError(f"{self.name}: g must be positive")
        if np.any(np.diff(vals, axis=0) >= 0.0):
            raise ConfigError(f"{self.name}: g(x, .) is not strictly decreasing")
        g0, ginf = self.g0(x), self.ginf(x)
        if np.any(ginf < 0.0) or np.any(ginf >= g0):
            raise ConfigError(f"{self.name}: need 0 <= g_inf < g_0")
        lip = self.lipschitz(xi_max)
        slopes = np.abs(np.diff(vals, axis=0)) / np.diff(xis)[:, None]
        if np.any(slopes > lip * (1 + 1e-12)):
            raise ConfigError(f"{self.name}: Lipschitz bound {lip} violated")
        return self


def one_plus_exp(a=1.0, b=1.0, c=1.0) -> Nonlinearity:
    """``g(xi) = a + b exp(-c xi)``; ``a = 0`` gives ``g_inf = 0``."""
    a, b, c = float(a), float(b), float(c)
    if a < 0 or b <= 0 or c <= 0:
        raise ConfigError("one_plus_exp needs a >= 0, b > 0, c > 0 (g strictly decreasing, positive)")

    def g(x, xi):
        return a + b * np.exp(-c * xi)

    def dg(x, xi):
        return -b * c * np.exp(-c * xi)

    def F(x, xi, p):
        xi = np.asarray(xi, dtype=float)
        return a * xi**p / p + b * c**-p * special.gamma(p) * special.gammainc(p, c * xi)

    return Nonlinearity(
        name="one_plus_exp",
        g=g,
        g0=lambda x: np.full(len(np.atleast_2d(x)), a + b),
        ginf=lambda x: np.full(len(np.atleast_2d(x)), a),
        lipschitz=lambda K: b * c,
        dg=dg,
        F=F,
        params={"a": a, "b": b, "c": c},
    )


def power_decay(a=1.0, b=1.0, c=1.0) -> Nonlinearity:
    """``g(xi) = a + b / (1 + xi)**c``; no closed form for ``F``."""
    a, b, c = float(a), float(b), float(c)
    if a < 0 or b <= 0 or c <= 0:
        raise ConfigError("power_decay needs a >= 0, b > 0, c > 0 (g strictly decreasing, positive)")

    def g(x, xi):
        return a + b * (1.0 + xi) ** -c

    def dg(x, xi):
        return -b * c * (1.0 + xi) ** (-c - 1.0)

    return Nonlinearity(
        name="power_decay",
        g=g,
        g0=lambda x: np.full(len(np.atleast_2d(x)), a + b),
        ginf=lambda x: np.full(len(np.atleast_2d(x)), a),
        lipschitz=lambda K: b * c,
        dg=dg,
        params={"a": a, "b": b, "c": c},
    )


def frozen_weight(gamma, name="frozen") -> Nonlinearity:
    """Constant-in-``xi`` coefficient ``g(x, xi) = gamma(x)`` on a fixed grid.

    Not a valid ``g`` for the main problem (not decreasing); it drives the
    auxiliary linear-growth problem used for comparison and blow-up checks.
    ``gamma`` is an array aligned with the grid nodes.
    """
    gamma = np.asarray(gamma, dtype=float).copy()
    gamma.flags.writeable = False

    def g(x, xi):
        return gamma * np.ones_like(xi)

    return Nonlinearity(
        name=name,
        g=g,
        g0=lambda x: gamma,
        ginf=lambda x: gamma,
        lipschitz=lambda K: 0.0,
        dg=lambda x, xi: np.zeros_like(xi),
        F=lambda x, xi, p: gamma * np.asarray(xi, dtype=float) ** p / p,
        params={},
    )


BUILTINS = {"one_plus_exp": one_plus_exp, "power_decay": power_decay}
