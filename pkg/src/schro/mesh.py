"""Radial finite-difference discretization of H^1_r(R^N).

Functions are sampled on a uniform mesh ``r_i = i*h`` of ``[0, R]``. The
Laplacian is the conservative (flux-form) three-point stencil

    (Δφ)_i = [S_{i+1/2}(φ_{i+1} - φ_i) - S_{i-1/2}(φ_i - φ_{i-1})] / W_i

with edge weights ``S = |S^{N-1}| r^{N-1} / h`` and lumped cell volumes ``W``.
At the origin this reduces to ``N φ''(0)``, so no ghost node is needed, and
every discrete energy identity (Green's formula, Nehari identities) holds to
rounding because quadrature, gradient form and Laplacian share one set of
weights.

The last node ``r = R`` carries a homogeneous Dirichlet value unless an
operator explicitly asks for a decay-matched Robin closure.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

MIN_NODES = 64

_SPHERE_FACTOR = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


class GridMismatchError(ValueError):
    """Two profiles (or a profile and a grid) do not share a mesh."""


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial mesh on ``[0, radius]`` for dimension ``dim``.

    Attributes:
        dim: Space dimension N (1, 2 or 3).
        radius: Truncation radius R.
        n: Number of nodes, including both endpoints.
    """

    dim: int
    radius: float
    n: int

    def __post_init__(self):
        if self.dim not in _SPHERE_FACTOR:
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if self.n < MIN_NODES:
            raise ValueError(f"need at least {MIN_NODES} nodes, got {self.n}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def h(self) -> float:
        return self.radius / (self.n - 1)

    @property
    def sphere_factor(self) -> float:
        return _SPHERE_FACTOR[self.dim]

    @cached_property
    def nodes(self) -> NDArray:
        r = np.arange(self.n) * self.h
        r[-1] = self.radius
        r.flags.writeable = False
        return r

    @cached_property
    def weights(self) -> NDArray:
        """Lumped cell volumes ``|S^{N-1}| ∫ r^{N-1} dr`` over each dual cell."""
        N, h = self.dim, self.h
        lo = np.maximum(self.nodes - h / 2, 0.0)
        hi = np.minimum(self.nodes + h / 2, self.radius)
        w = self.sphere_factor * (hi**N - lo**N) / N
        w.flags.writeable = False
        return w

    @cached_property
    def edge_weights(self) -> NDArray:
        """Flux coefficients ``|S^{N-1}| r_{i+1/2}^{N-1} / h`` for the n-1 edges."""
        mid = self.nodes[:-1] + self.h / 2
        s = self.sphere_factor * mid ** (self.dim - 1) / self.h
        s.flags.writeable = False
        return s

    @property
    def boundary_area(self) -> float:
        return self.sphere_factor * self.radius ** (self.dim - 1)

    def __repr__(self):
        return f"RadialGrid(dim={self.dim}, radius={self.radius:g}, n={self.n}, h={self.h:g})"


def build_grid(dim: int, radius: float, n: int) -> RadialGrid:
    """Uniform radial grid with ``n`` nodes on ``[0, radius]``."""
    return RadialGrid(int(dim), float(radius), int(n))


@dataclass(frozen=True, eq=False)
class Profile:
    """A radial function sampled at the nodes of ``grid``."""

    grid: RadialGrid
    values: NDArray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise GridMismatchError(
                f"profile has {vals.shape} values, grid has {self.grid.n} nodes"
            )
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def r(self) -> NDArray:
        return self.grid.nodes

    def _other(self, other):
        if isinstance(other, Profile):
            if other.grid != self.grid:
                raise GridMismatchError(f"{self.grid} vs {other.grid}")
            return other.values
        return other

    def __add__(self, other):
        return Profile(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Profile(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Profile(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return Profile(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Profile(self.grid, self.values / self._other(other))

    def __neg__(self):
        return Profile(self.grid, -self.values)

    def __len__(self):
        return self.grid.n

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def to_csv(self, path) -> None:
        write_profile_csv(path, self)


def as_profile(grid: RadialGrid, f) -> Profile:
    """Wrap an array (or callable of r) as a Profile on ``grid``."""
    if isinstance(f, Profile):
        if f.grid != grid:
            raise GridMismatchError(f"{f.grid} vs {grid}")
        return f
    if callable(f):
        return Profile(grid, f(grid.nodes))
    return Profile(grid, f)


def values_on(grid: RadialGrid, f: Profile | ArrayLike) -> NDArray:
    """Raw node values of ``f``, checking the grid when ``f`` is a Profile."""
    if isinstance(f, Profile):
        if f.grid != grid:
            raise GridMismatchError(f"{f.grid} vs {grid}")
        return f.values
    arr = np.asarray(f, dtype=float)
    if arr.shape != (grid.n,):
        raise GridMismatchError(f"expected {grid.n} values, got {arr.shape}")
    return arr


def _dirichlet(grid, f):
    v = np.array(values_on(grid, f), dtype=float)
    v[-1] = 0.0
    return v


def stiffness_bands(grid: RadialGrid, robin: float | None = None):
    """Diagonal and off-diagonal of the symmetric stiffness matrix ``K``.

    ``φ^T K φ`` approximates ``∫|∇φ|^2``. With ``robin=None`` the unknowns are
    nodes ``0..n-2`` (Dirichlet at R). With a Robin coefficient ``γ`` all n
    nodes are unknowns and ``γ |∂B_R| φ(R)^2`` is added, which encodes
    ``φ'(R) = -γ φ(R)``.
    """
    s = grid.edge_weights
    diag = np.zeros(grid.n)
    diag[:-1] += s
    diag[1:] += s
    off = -s.copy()
    if robin is None:
        return diag[:-1], off[:-1]
    diag[-1] += robin * grid.boundary_area
    return diag, off


def stiffness_apply(grid: RadialGrid, phi: NDArray) -> NDArray:
    """``K φ`` on all nodes (the boundary row included, value at R as given)."""
    s = grid.edge_weights
    flux = s * np.diff(phi)
    out = np.zeros_like(phi)
    out[:-1] -= flux
    out[1:] += flux
    return out


def laplacian_apply(grid: RadialGrid, phi: Profile | ArrayLike) -> Profile:
    """Discrete ``Δφ = φ'' + (N-1)/r φ'``; zero is returned at the boundary node."""
    v = _dirichlet(grid, phi)
    lap = -stiffness_apply(grid, v) / grid.weights
    lap[-1] = 0.0
    return Profile(grid, lap)


def integrate(grid: RadialGrid, f: Profile | ArrayLike) -> float:
    """``∫_{R^N} f`` for a radial ``f`` (lumped r^{N-1}-weighted quadrature)."""
    return float(np.dot(grid.weights, values_on(grid, f)))


def trapezoid(grid: RadialGrid, f: Profile | ArrayLike) -> float:
    """Plain trapezoid rule for ``|S^{N-1}| ∫ f r^{N-1} dr``."""
    r = grid.nodes
    return grid.sphere_factor * float(np.trapezoid(values_on(grid, f) * r ** (grid.dim - 1), r))


def dirichlet_form(grid: RadialGrid, u, v) -> float:
    """``∫ ∇u·∇v`` from edge differences."""
    du = np.diff(_dirichlet(grid, u))
    dv = np.diff(_dirichlet(grid, v))
    return float(np.dot(grid.edge_weights, du * dv))


def inner_l2(grid: RadialGrid, u, v) -> float:
    return integrate(grid, values_on(grid, u) * values_on(grid, v))


def l2_norm(grid: RadialGrid, u) -> float:
    return math.sqrt(max(inner_l2(grid, u, u), 0.0))


def inner_h1(grid: RadialGrid, u, v) -> float:
    """H^1 inner product ``∫(∇u·∇v + uv)``."""
    return dirichlet_form(grid, u, v) + inner_l2(grid, _dirichlet(grid, u), _dirichlet(grid, v))


def h1_norm(grid: RadialGrid, u) -> float:
    return math.sqrt(max(inner_h1(grid, u, u), 0.0))


def pair_norm(grid: RadialGrid, u, v) -> float:
    """Product-space norm ``sqrt(‖u‖^2 + ‖v‖^2)``."""
    return math.sqrt(max(inner_h1(grid, u, u) + inner_h1(grid, v, v), 0.0))


def write_profile_csv(path, profile: Profile) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "value"])
        for r, val in zip(profile.grid.nodes, profile.values):
            w.writerow([repr(float(r)), repr(float(val))])


def read_profile_csv(path, dim: int) -> Profile:
    """Read a ``r,value`` CSV back into a Profile on a uniform grid."""
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    r = np.array([float(row["r"]) for row in rows])
    vals = np.array([float(row["value"]) for row in rows])
    grid = build_grid(dim, r[-1], len(r))
    if not np.allclose(r, grid.nodes, rtol=0, atol=1e-12 * max(1.0, r[-1])):
        raise ValueError(f"{path}: nodes are not uniform")
    return Profile(grid, vals)
