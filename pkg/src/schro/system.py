"""Discrete form of the coupled system

    -Δu + u + κv = μ₁ g(u) + β u v²
    -Δv + v + κu = μ₂ g(v) + β u² v

with ``g(s) = s³`` (or ``(s⁺)³`` for the cutoff variant). Unknowns are the
node values ``0..n-2`` of both components; the last node is Dirichlet.
The nodal residual is ``W⁻¹F`` where ``F`` is the gradient of the discrete
energy, so residuals, gradients and Jacobians are mutually consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .mesh import Profile, RadialGrid, stiffness_apply, values_on


@dataclass(frozen=True)
class Params:
    """Problem data ``(κ, β, μ₁, μ₂, N)`` with ``μ₂ ≥ μ₁ > 0``."""

    kappa: float
    beta: float
    mu1: float = 1.0
    mu2: float = 1.0
    dim: int = 3

    def __post_init__(self):
        if not self.mu1 > 0:
            raise ValueError(f"μ₁ must be positive, got {self.mu1}")
        if self.mu2 < self.mu1:
            raise ValueError(f"need μ₂ ≥ μ₁, got μ₁={self.mu1}, μ₂={self.mu2}")
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dim}")

    @property
    def symmetric(self) -> bool:
        return self.mu1 == self.mu2

    def with_kappa(self, kappa: float) -> "Params":
        return replace(self, kappa=float(kappa))


def _cube(x, cutoff):
    if cutoff:
        xp = np.maximum(x, 0.0)
        return xp**3, 3 * xp**2
    return x**3, 3 * x**2


def _dirichlet(grid, f):
    x = np.array(values_on(grid, f), dtype=float)
    x[-1] = 0.0
    return x


def gradient_vectors(p: Params, grid: RadialGrid, u, v, cutoff: bool = False):
    """Energy gradient ``(F_u, F_v)`` on all nodes (boundary entry zeroed)."""
    u = _dirichlet(grid, u)
    v = _dirichlet(grid, v)
    W = grid.weights
    gu, _ = _cube(u, cutoff)
    gv, _ = _cube(v, cutoff)
    Fu = stiffness_apply(grid, u) + W * (u + p.kappa * v - p.mu1 * gu - p.beta * u * v * v)
    Fv = stiffness_apply(grid, v) + W * (v + p.kappa * u - p.mu2 * gv - p.beta * u * u * v)
    Fu[-1] = 0.0
    Fv[-1] = 0.0
    return Fu, Fv


def residual_profiles(p: Params, grid: RadialGrid, u, v, cutoff: bool = False):
    """Strong-form residuals ``(-Δu + u + κv - μ₁u³ - βuv², ...)`` as Profiles."""
    Fu, Fv = gradient_vectors(p, grid, u, v, cutoff)
    W = grid.weights
    return Profile(grid, Fu / W), Profile(grid, Fv / W)


def residual_norm(p: Params, grid: RadialGrid, u, v, cutoff: bool = False) -> float:
    """L² norm of the strong residual pair."""
    Fu, Fv = gradient_vectors(p, grid, u, v, cutoff)
    W = grid.weights
    return math.sqrt(float(np.sum((Fu * Fu + Fv * Fv) / W)))


def relative_residual(p: Params, grid: RadialGrid, u, v, cutoff: bool = False) -> float:
    """Residual norm scaled by ``1 + ‖(u,v)‖_H``."""
    from .mesh import pair_norm

    return residual_norm(p, grid, u, v, cutoff) / (1.0 + pair_norm(grid, u, v))


# -- Newton matrices ----------------------------------------------------------

def interleave(u_inner: np.ndarray, v_inner: np.ndarray) -> np.ndarray:
    x = np.empty(2 * u_inner.size)
    x[0::2] = u_inner
    x[1::2] = v_inner
    return x


def split(x: np.ndarray, n: int):
    """Inverse of :func:`interleave`, padding the Dirichlet node with zero."""
    u = np.zeros(n)
    v = np.zeros(n)
    u[:-1] = x[0::2]
    v[:-1] = x[1::2]
    return u, v


def jacobian(p: Params, grid: RadialGrid, u, v, cutoff: bool = False) -> sp.csc_matrix:
    """Hessian of the discrete energy in interleaved ``(u₀, v₀, u₁, v₁, ...)`` order."""
    u = values_on(grid, u)[:-1]
    v = values_on(grid, v)[:-1]
    m = u.size
    W = grid.weights[:-1]
    S = grid.edge_weights
    kd = S[:m].copy()
    kd[1:] += S[: m - 1]
    koff = -S[: m - 1]
    _, du = _cube(u, cutoff)
    _, dv = _cube(v, cutoff)
    duu = kd + W * (1 - p.mu1 * du - p.beta * v * v)
    dvv = kd + W * (1 - p.mu2 * dv - p.beta * u * u)
    duv = W * (p.kappa - 2 * p.beta * u * v)

    main = interleave(duu, dvv)
    sub1 = np.zeros(2 * m - 1)
    sub1[0::2] = duv
    sub2 = np.zeros(2 * m - 2)
    sub2[0::2] = koff
    sub2[1::2] = koff
    return sp.diags([sub2, sub1, main, sub1, sub2], [-2, -1, 0, 1, 2], format="csc")


def kappa_derivative(grid: RadialGrid, u, v) -> np.ndarray:
    """``∂F/∂κ`` in interleaved order."""
    W = grid.weights[:-1]
    u = values_on(grid, u)[:-1]
    v = values_on(grid, v)[:-1]
    return interleave(W * v, W * u)
