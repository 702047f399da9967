"""Energy, Nehari projection and a constrained minimizer for ground states.

The energy is

    I(u, v) = ½(‖u‖² + ‖v‖²) + κ∫uv - ¼∫(μ₁u⁴ + μ₂v⁴) - (β/2)∫u²v²

with ``‖·‖`` the H¹ norm. On the Nehari manifold ``⟨I'(u,v), (u,v)⟩ = 0``,
so the quadratic and quartic parts are tied together and
``I = ¼(‖u‖² + ‖v‖² + 2κ∫uv)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import DegenerateComponent, NotProjectable
from .mesh import (GridMismatchError, Profile, RadialGrid, dirichlet_form, integrate,
                   pair_norm, stiffness_bands)
from .system import Params, gradient_vectors, residual_profiles


@dataclass(frozen=True)
class NehariState:
    """Result of :func:`minimize_ground_state`.

    Attributes:
        pair: The minimizing pair.
        energy: ``I(u, v)``.
        residual: L² norm of the free gradient (strong residual pair).
        on_manifold_defect: ``|⟨I'(u,v), (u,v)⟩|``.
        iterations: Accepted descent steps.
        converged: Whether ``residual ≤ tol`` was reached.
        positive: Both components strictly positive at interior nodes.
        energy_history: Energies of the accepted iterates.
    """

    pair: tuple
    energy: float
    residual: float
    on_manifold_defect: float
    iterations: int = 0
    converged: bool = True
    positive: bool = True
    energy_history: tuple = field(default=(), repr=False)


def _common_grid(u, v) -> RadialGrid:
    if not (isinstance(u, Profile) and isinstance(v, Profile)):
        raise TypeError("u and v must be Profiles")
    if u.grid != v.grid:
        raise GridMismatchError(f"{u.grid} vs {v.grid}")
    return u.grid


def _parts(p: Params, grid, u, v):
    """Quadratic part ``‖u‖²+‖v‖²+2κ∫uv`` and quartic part ``∫(μ₁u⁴+μ₂v⁴+2βu²v²)``."""
    u = np.array(u.values)
    v = np.array(v.values)
    u[-1] = v[-1] = 0.0
    quad = (dirichlet_form(grid, u, u) + dirichlet_form(grid, v, v)
            + integrate(grid, u * u + v * v + 2 * p.kappa * u * v))
    u2, v2 = u * u, v * v
    quart = integrate(grid, p.mu1 * u2 * u2 + p.mu2 * v2 * v2 + 2 * p.beta * u2 * v2)
    return quad, quart


def energy_I(p: Params, u: Profile, v: Profile) -> float:
    """Discrete ``I_{κ,β}(u, v)``."""
    grid = _common_grid(u, v)
    quad, quart = _parts(p, grid, u, v)
    return 0.5 * quad - 0.25 * quart


def norm1_sq(p: Params, u: Profile, v: Profile) -> float:
    """``‖(u,v)‖₁² = ‖u‖² + ‖v‖² + 2κ∫uv``; equals ``4I`` on the manifold."""
    grid = _common_grid(u, v)
    return _parts(p, grid, u, v)[0]


def gradient_I(p: Params, u: Profile, v: Profile):
    """Strong-form gradient: the residual profile pair of the system.

    The discrete energy satisfies ``dI(u,v)[φ,ψ] = ∫(g_u φ + g_v ψ)`` exactly,
    with ``(g_u, g_v)`` the returned pair.
    """
    grid = _common_grid(u, v)
    return residual_profiles(p, grid, u, v)


def nehari_defect(p: Params, u: Profile, v: Profile) -> float:
    """``⟨I'(u,v), (u,v)⟩`` (signed)."""
    grid = _common_grid(u, v)
    quad, quart = _parts(p, grid, u, v)
    return quad - quart


def nehari_t(p: Params, u: Profile, v: Profile) -> float:
    """Positive ``t`` with ``(tu, tv)`` on the Nehari manifold.

    Raises:
        DegenerateComponent: A component vanishes identically (the manifold
            requires ``u ≠ 0`` and ``v ≠ 0``).
        NotProjectable: The quartic part is not positive.
        ValueError: The quadratic part is not positive (``κ ≤ -1`` regime).
    """
    grid = _common_grid(u, v)
    if not np.any(u.values[:-1]) or not np.any(v.values[:-1]):
        raise DegenerateComponent("Nehari manifold needs u ≠ 0 and v ≠ 0")
    quad, quart = _parts(p, grid, u, v)
    if not quart > 0:
        raise NotProjectable(f"∫(μ₁u⁴+μ₂v⁴+2βu²v²) = {quart:.6g} is not positive")
    if not quad > 0:
        raise ValueError(f"quadratic form is not positive here ({quad:.6g})")
    return math.sqrt(quad / quart)


def project(p: Params, u: Profile, v: Profile):
    t = nehari_t(p, u, v)
    return u * t, v * t


class _Preconditioner:
    """Banded solve with ``K + W``, the discrete ``-Δ + 1`` in weak form."""

    def __init__(self, grid: RadialGrid):
        d, off = stiffness_bands(grid)
        ab = np.zeros((3, d.size))
        ab[0, 1:] = off
        ab[1] = d + grid.weights[:-1]
        ab[2, :-1] = off
        self.ab = ab

    def __call__(self, F):
        out = np.zeros(F.size)
        out[:-1] = solve_banded((1, 1), self.ab, F[:-1])
        return out


def _free_gradient_norm(p, grid, u, v):
    Fu, Fv = gradient_vectors(p, grid, u, v)
    W = grid.weights
    return math.sqrt(float(np.sum((Fu * Fu + Fv * Fv) / W)))


def minimize_ground_state(p: Params, init, tol: float = 1e-6, max_iter: int = 2000,
                          armijo: float = 1e-4) -> NehariState:
    """Minimize I on the Nehari manifold starting from ``init``.

    Each iteration replaces both components by their absolute values,
    takes an H¹-preconditioned gradient step with Armijo backtracking on the
    projected energy, and re-projects onto the manifold. Stops when the L²
    norm of the free gradient drops below ``tol``; otherwise the best iterate
    is returned with ``converged=False``.
    """
    u0, v0 = init
    grid = _common_grid(u0, v0)
    precond = _Preconditioner(grid)
    u, v = project(p, Profile(grid, np.abs(u0.values)), Profile(grid, np.abs(v0.values)))
    energy = energy_I(p, u, v)
    history = [energy]
    step = 1.0
    res = _free_gradient_norm(p, grid, u.values, v.values)
    it = 0
    while res > tol and it < max_iter:
        Fu, Fv = gradient_vectors(p, grid, u.values, v.values)
        du, dv = precond(Fu), precond(Fv)
        slope = float(np.dot(Fu, du) + np.dot(Fv, dv))
        accepted = False
        while step > 1e-12:
            try:
                cu, cv = project(p, Profile(grid, np.abs(u.values - step * du)),
                                 Profile(grid, np.abs(v.values - step * dv)))
            except (NotProjectable, DegenerateComponent, ValueError):
                step *= 0.5
                continue
            e = energy_I(p, cu, cv)
            if e <= energy - armijo * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        u, v, energy = cu, cv, e
        history.append(energy)
        res = _free_gradient_norm(p, grid, u.values, v.values)
        step = min(2.0 * step, 1.0)
        it += 1
    positive = bool(np.all(u.values[:-1] > 0) and np.all(v.values[:-1] > 0))
    return NehariState(
        pair=(u, v),
        energy=energy,
        residual=res,
        on_manifold_defect=abs(nehari_defect(p, u, v)),
        iterations=it,
        converged=res <= tol,
        positive=positive,
        energy_history=tuple(history),
    )


def manifold_defect_ok(state: NehariState, rtol: float = 1e-8) -> bool:
    grid = state.pair[0].grid
    return state.on_manifold_defect <= rtol * pair_norm(grid, *state.pair) ** 2
