"""Uniform grids on the unit interval and unit square with zero Dirichlet data.

Only interior nodes carry unknowns; boundary values are identically zero and
never stored. Node values are flattened in C order, so on a 2D grid the node
``(i, j)`` sits at index ``i * ny + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from plapflow.errors import ConfigError


@dataclass(frozen=True)
class Grid:
    """Tensor-product grid of interior nodes on ``(0, 1)**dim``."""

    dim: int
    n: tuple[int, ...]

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if len(self.n) != self.dim:
            raise ConfigError(f"expected {self.dim} node counts, got {len(self.n)}")
        if any(int(k) != k or k < 3 for k in self.n):
            raise ConfigError(f"need at least 3 interior nodes per axis, got {self.n}")

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(1.0 / (k + 1) for k in self.n)

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.n)

    @property
    def cell_volume(self) -> float:
        """Quadrature weight attached to every interior node."""
        return float(np.prod(self.h))

    def axis_coords(self, axis: int) -> np.ndarray:
        k = self.n[axis]
        return np.arange(1, k + 1) / (k + 1)

    @cached_property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``(size, dim)``."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def sample(self, func) -> GridFunction:
        """Evaluate ``func(*coordinate_arrays)`` at the interior nodes."""
        x = self.coords
        return GridFunction(self, np.asarray(func(*x.T), dtype=float))

    def zeros(self) -> GridFunction:
        return GridFunction(self, np.zeros(self.size))

    def ones(self) -> GridFunction:
        return GridFunction(self, np.ones(self.size))

    def sine_profile(self) -> GridFunction:
        """Product of ``sin(pi x_k)`` over the axes; strictly positive inside."""
        return self.sample(lambda *xs: np.prod([np.sin(np.pi * x) for x in xs], axis=0))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values on the interior nodes of a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size != self.grid.size:
            raise ConfigError(f"expected {self.grid.size} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ConfigError("grid function has non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> GridFunction:
        return GridFunction(self.grid, values)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, GridFunction):
            other = other.values
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            other = other.values
        return self.with_values(self.values - other)

    def __neg__(self):
        return self.with_values(-self.values)

    def reshape(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)


def build_grid(dim: int, n_per_axis) -> Grid:
    """Uniform grid on ``(0,1)**dim`` with ``n`` interior nodes per axis.

    A scalar ``n_per_axis`` is broadcast to every axis.
    """
    if np.isscalar(n_per_axis):
        n_per_axis = [n_per_axis] * int(dim)
    try:
        n = tuple(int(k) for k in n_per_axis)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad node counts {n_per_axis!r}") from exc
    return Grid(int(dim), n)


# Difference operators. Every edge, including those touching the boundary,
# carries a normal difference; in 2D it also carries a tangential gradient
# component averaged from the neighbouring cross differences. Each 2D edge
# family is on its own a full quadrature of the square (midpoint rule along
# the normal axis, trapezoid rule along the tangential one, whose end rows lie
# on the wall), and the two families are averaged.

@dataclass(frozen=True)
class EdgeFamily:
    normal: object  # sparse (edges x nodes)
    tangential: object | None
    weight: np.ndarray  # quadrature weight per edge


@dataclass(frozen=True)
class EdgeOperators:
    families: tuple[EdgeFamily, ...]


def _diff_1d(n, h):
    import scipy.sparse as sp

    # (n+1) x n forward difference with zero boundary values
    return sp.diags([np.ones(n), -np.ones(n)], [-1, 0], shape=(n + 1, n), format="csr") / h


def _avg_pad_1d(n):
    import scipy.sparse as sp

    # (n+1) x n average of neighbours, boundary values zero
    return sp.diags([0.5 * np.ones(n), 0.5 * np.ones(n)], [-1, 0], shape=(n + 1, n), format="csr")


def _pad_1d(n):
    import scipy.sparse as sp

    # (n+2) x n: values on interior plus the two wall nodes
    return sp.eye(n + 2, n, k=-1, format="csr")


def _node_derivative_1d(n, h):
    import scipy.sparse as sp

    # (n+2) x n: central differences inside, one-sided at the two walls
    d = sp.diags([-0.5 * np.ones(n), 0.5 * np.ones(n)], [-2, 0], shape=(n + 2, n), format="lil")
    d[0, 0] = 1.0
    d[n + 1, n - 1] = -1.0
    return (d / h).tocsr()


def _trapezoid(n, h):
    w = np.full(n + 2, h)
    w[[0, -1]] = 0.5 * h
    return w


_OPS_CACHE: dict[Grid, EdgeOperators] = {}


def edge_operators(grid: Grid) -> EdgeOperators:
    ops = _OPS_CACHE.get(grid)
    if ops is not None:
        return ops
    import scipy.sparse as sp

    if grid.dim == 1:
        (n,), (h,) = grid.n, grid.h
        ops = EdgeOperators((EdgeFamily(_diff_1d(n, h), None, np.full(n + 1, h)),))
    else:
        (nx, ny), (hx, hy) = grid.n, grid.h
        dx, dy = _diff_1d(nx, hx), _diff_1d(ny, hy)
        x_edges = EdgeFamily(
            sp.kron(dx, _pad_1d(ny), format="csr"),
            sp.kron(_avg_pad_1d(nx), _node_derivative_1d(ny, hy), format="csr"),
            0.5 * np.kron(np.full(nx + 1, hx), _trapezoid(ny, hy)),
        )
        y_edges = EdgeFamily(
            sp.kron(_pad_1d(nx), dy, format="csr"),
            sp.kron(_node_derivative_1d(nx, hx), _avg_pad_1d(ny), format="csr"),
            0.5 * np.kron(_trapezoid(nx, hx), np.full(ny + 1, hy)),
        )
        ops = EdgeOperators((x_edges, y_edges))
    _OPS_CACHE[grid] = ops
    return ops


def edge_gradients(grid: Grid, u: np.ndarray):
    """Per-family ``(normal, tangential, magnitude)`` edge gradient arrays."""
    out = []
    for fam in edge_operators(grid).families:
        dn = fam.normal @ u
        if fam.tangential is None:
            dt = np.zeros_like(dn)
            mag = np.abs(dn)
        else:
            dt = fam.tangential @ u
            mag = np.hypot(dn, dt)
        out.append((dn, dt, mag))
    return out


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)


def norm_sup(f: GridFunction) -> float:
    v = _values(f)
    return float(np.max(np.abs(v))) if v.size else 0.0


def norm_Lq(f: GridFunction, q: float) -> float:
    """Discrete L^q norm with nodal quadrature weight ``h**dim``."""
    if q <= 1:
        raise ConfigError(f"q must exceed 1, got {q}")
    v = np.abs(_values(f))
    scale = v.max(initial=0.0)
    if scale == 0.0:
        return 0.0
    return float(scale * (f.grid.cell_volume * np.sum((v / scale) ** q)) ** (1.0 / q))


def seminorm_grad_p(f: GridFunction, p: float) -> float:
    """Discrete ``||grad f||_p`` with edge-staggered quadrature."""
    fams = edge_operators(f.grid).families
    mags = [m for _, _, m in edge_gradients(f.grid, _values(f))]
    scale = max((m.max(initial=0.0) for m in mags), default=0.0)
    if scale == 0.0:
        return 0.0
    total = sum(np.dot(fam.weight, (m / scale) ** p) for fam, m in zip(fams, mags))
    return float(scale * total ** (1.0 / p))
