"""Weighted radial eigenproblem ``-Δφ + C(κ) φ = λ ω² φ`` and Morse indices.

The pencil is assembled with the stiffness and lumped mass of
:mod:`schro.mesh`. Eigenfunctions of the pencil decay like ``e^{-√C r}``,
which for κ near 1 is far too slow for a Dirichlet cut at R, so the linear
operators here close the interval with the decay-matched Robin condition
``φ'(R) = -(√C + (N-1)/(2R)) φ(R)``. Since ``ω(R) = 0`` the boundary node
carries no weight and is condensed out, leaving a symmetric tridiagonal
pencil on nodes ``0..n-2``.

Eigenvalues come from LAPACK's Sturm-bisection driver (``stebz``) applied to
the diagonally symmetrized matrix; eigenprofiles are polished by inverse
iteration on the unscaled pencil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .ground_state import GroundState, rescale
from .mesh import Profile, RadialGrid, stiffness_bands, values_on

EIG_TOL = 1e-10


def coupling_C(kappa: float) -> float:
    """``C(κ) = (1-κ)/(1+κ)``, decreasing on ``(-1, ∞)``."""
    if not kappa > -1:
        raise ValueError(f"C(κ) needs κ > -1, got {kappa}")
    return (1.0 - kappa) / (1.0 + kappa)


def far_field_robin(mass: float, grid: RadialGrid) -> float:
    """Robin coefficient matching the decay of ``-Δ + mass`` outside the well."""
    return math.sqrt(max(mass, 0.0)) + (grid.dim - 1) / (2.0 * grid.radius)


@dataclass(frozen=True)
class EigenPair:
    """One eigenpair of the weighted problem at a given κ.

    ``phi`` is normalized so that ``∫ω²φ² = 1`` and ``φ(0) > 0``.
    """

    j: int
    kappa: float
    eigenvalue: float
    phi: Profile
    residual: float = float("nan")


@dataclass(frozen=True)
class MorseIndexReport:
    kappa: float
    beta: float
    index: int
    negative_eigenvalues: tuple
    sum_block: int = 0
    difference_block: int = 0


@dataclass(frozen=True)
class Pencil:
    """Tridiagonal ``A = K + c·M`` with Robin closure, plus the weight ``B = M ω²``.

    All arrays cover the n grid nodes.
    """

    grid: RadialGrid
    diag: np.ndarray
    off: np.ndarray
    weight: np.ndarray
    shift: float = field(default=0.0)

    def apply(self, phi):
        out = self.diag * phi
        out[:-1] += self.off * phi[1:]
        out[1:] += self.off * phi[:-1]
        return out

    def condensed(self):
        """Eliminate the weightless boundary node: returns (diag, off, weight) on n-1 nodes."""
        a_ll = self.diag[-1]
        d = self.diag[:-1].copy()
        d[-1] -= self.off[-1] ** 2 / a_ll
        return d, self.off[:-1], self.weight[:-1]

    def extend(self, phi_inner):
        phi = np.empty(self.grid.n)
        phi[:-1] = phi_inner
        phi[-1] = -self.off[-1] * phi_inner[-1] / self.diag[-1]
        return phi


def pencil(gs: GroundState, kappa: float) -> Pencil:
    """Assemble ``(-Δ + C(κ)) φ = λ ω² φ`` on the ground state's grid."""
    C = coupling_C(kappa)
    grid = gs.grid
    d, off = stiffness_bands(grid, robin=far_field_robin(C, grid))
    W = grid.weights
    w = values_on(grid, gs.omega)
    return Pencil(grid, d + C * W, off.copy(), W * w * w, shift=C)


def sturm_count(diag: np.ndarray, off: np.ndarray) -> int:
    """Number of negative eigenvalues of a symmetric tridiagonal matrix.

    Counts negative pivots of the LDLᵀ recurrence (Sylvester inertia).
    """
    tiny = np.finfo(float).tiny
    e2 = (np.asarray(off, dtype=float) ** 2).tolist()
    a = np.asarray(diag, dtype=float).tolist()
    q = a[0]
    count = 1 if q < 0 else 0
    for i in range(1, len(a)):
        if q == 0.0:
            q = -tiny
        q = a[i] - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def count_below(gs: GroundState, kappa: float, value: float) -> int:
    """How many eigenvalues ``λ_j(κ)`` lie strictly below ``value``."""
    d, off, b = pencil(gs, kappa).condensed()
    return sturm_count(d - value * b, off)


def _symmetrized(d, off, b):
    s = 1.0 / np.sqrt(b)
    return d * s * s, off * s[:-1] * s[1:], s


def _inverse_iteration(d, off, b, lam, phi, steps=2):
    n = d.size
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[2, :-1] = off
    sigma = lam + 1e-9 * max(1.0, abs(lam))
    ab[1] = d - sigma * b
    for _ in range(steps):
        phi = solve_banded((1, 1), ab, b * phi)
        phi /= math.sqrt(float(np.dot(b, phi * phi)))
    return phi


def eigen_lambda(gs: GroundState, kappa: float, m: int) -> list[EigenPair]:
    """The ``m`` smallest eigenpairs of ``-Δφ + C(κ)φ = λ ω² φ``."""
    if m < 1:
        raise ValueError("need m >= 1")
    if m > gs.grid.n // 10:
        raise ValueError(f"m={m} is beyond the grid resolution limit n/10")
    P = pencil(gs, kappa)
    d, off, b = P.condensed()
    if np.any(b <= 0):
        raise RuntimeError("ω² weight is not positive: ground state corrupted")
    td, te, s = _symmetrized(d, off, b)
    lams, vecs = eigh_tridiagonal(td, te, select="i", select_range=(0, m - 1),
                                  tol=EIG_TOL, lapack_driver="stebz")
    out = []
    for j in range(m):
        phi = _inverse_iteration(d, off, b, lams[j], vecs[:, j] * s)
        Aphi = d * phi
        Aphi[:-1] += off * phi[1:]
        Aphi[1:] += off * phi[:-1]
        lam = float(np.dot(phi, Aphi) / np.dot(b, phi * phi))
        if phi[0] < 0:
            phi = -phi
        full = P.extend(phi)
        full /= math.sqrt(float(np.dot(P.weight, full * full)))
        prof = Profile(gs.grid, full)
        out.append(EigenPair(j + 1, float(kappa), lam, prof,
                             eigen_residual(gs, kappa, lam, prof)))
    return out


def eigenvalues(gs: GroundState, kappa: float, m: int) -> np.ndarray:
    """Only the m smallest ``λ_j(κ)`` (no eigenprofiles)."""
    d, off, b = pencil(gs, kappa).condensed()
    td, te, _ = _symmetrized(d, off, b)
    return eigh_tridiagonal(td, te, eigvals_only=True, select="i",
                            select_range=(0, m - 1), tol=EIG_TOL, lapack_driver="stebz")


def eigen_residual(gs: GroundState, kappa: float, lam: float, phi: Profile) -> float:
    """``‖-Δφ + Cφ - λω²φ‖_{L²} / ‖φ‖_{L²}`` with the Robin closure."""
    P = pencil(gs, kappa)
    v = values_on(gs.grid, phi)
    W = gs.grid.weights
    res = (P.apply(v) - lam * P.weight * v) / W
    return math.sqrt(float(np.dot(W, res * res)) / float(np.dot(W, v * v)))


def rayleigh_J(gs: GroundState, phi: Profile, kappa: float) -> float:
    """``(∫|∇φ|² + C(κ)φ²) / ∫ω²φ²`` (Robin boundary term included)."""
    P = pencil(gs, kappa)
    v = values_on(gs.grid, phi)
    den = float(np.dot(P.weight, v * v))
    if den == 0.0:
        raise ValueError("Rayleigh quotient of the zero profile")
    return float(np.dot(v, P.apply(v))) / den


def lambda1_lower_bound(gs: GroundState, kappa: float) -> float:
    """Analytic lower bound for ``λ_1(κ)`` from ``0 < ω ≤ |ω|_∞``.

    ``C/|ω|²_∞`` needs ``C ≥ 0`` and ``1 + (C-1)/|ω|²_∞`` needs ``C ≥ 1``;
    outside those ranges the term is dropped (``-inf`` when neither applies).
    """
    C = coupling_C(kappa)
    s2 = gs.center_value**2
    bounds = [-math.inf]
    if C >= 0:
        bounds.append(C / s2)
    if C >= 1:
        bounds.append(1 + (C - 1) / s2)
    return max(bounds)


def _block(grid, omega_k, mass, coef):
    d, off = stiffness_bands(grid, robin=far_field_robin(mass, grid))
    W = grid.weights
    return d + W * (mass - coef * omega_k**2), off, W


def _negative_eigs(d, off, W):
    s = 1.0 / np.sqrt(W)
    vals = eigh_tridiagonal(d * s * s, off * s[:-1] * s[1:], eigvals_only=True,
                            select="v", select_range=(-np.inf, 0.0), tol=EIG_TOL,
                            lapack_driver="stebz")
    return vals[vals < 0]


def morse_index_on_branch(gs: GroundState, kappa: float, beta: float,
                          grid: RadialGrid | None = None) -> MorseIndexReport:
    """Morse index of the energy at the synchronized point ``T⁺(κ, β)``.

    The Hessian splits along ``(1,1)`` and ``(1,-1)`` into

        L₊ = -Δ + (1+κ) - 3(1+κ) ω_κ²
        L₋ = -Δ + (1-κ) - (1+κ)(3-β)/(1+β) ω_κ²

    with ``ω_κ(r) = ω(√(1+κ) r)`` resampled on ``grid``; the index is the
    total count of negative eigenvalues.
    """
    if not kappa > -1 or not beta > -1:
        raise ValueError(f"need κ > -1 and β > -1, got κ={kappa}, β={beta}")
    grid = gs.grid if grid is None else grid
    wk = values_on(grid, rescale(gs, math.sqrt(1 + kappa), grid))
    plus = _block(grid, wk, 1 + kappa, 3 * (1 + kappa))
    minus = _block(grid, wk, 1 - kappa, (1 + kappa) * (3 - beta) / (1 + beta))
    neg_p = _negative_eigs(*plus)
    neg_m = _negative_eigs(*minus)
    n_p = sturm_count(plus[0], plus[1])
    n_m = sturm_count(minus[0], minus[1])
    if (n_p, n_m) != (neg_p.size, neg_m.size):
        raise RuntimeError(
            f"inertia mismatch: Sturm counts {(n_p, n_m)} vs "
            f"eigenvalue counts {(neg_p.size, neg_m.size)}"
        )
    negs = tuple(sorted(float(x) for x in np.concatenate([neg_p, neg_m])))
    return MorseIndexReport(float(kappa), float(beta), n_p + n_m, negs, n_p, n_m)
