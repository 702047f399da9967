"""Synchronized solution branches, their bifurcation points and region maps.

Substituting ``u = a₁ω(bx)``, ``v = a₂ω(bx)`` into the system gives two
families of exact solutions,

    T⁺:  u = v = a ω(bx),   a² = (1+κ)/(1+β),  b² = 1+κ
    T⁻:  u = -v = a ω(bx),  a² = (1-κ)/(1+β),  b² = 1-κ

exchanged by the symmetry σ(κ, β, u, v) = (-κ, β, u, -v). Along T⁺ at fixed
β the linearization has a kernel exactly when ``f(β) = λ_j(κ)`` with
``f(β) = (3-β)/(1+β)``, and the kernel has the form ``(φ_j, -φ_j)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .ground_state import GroundState, rescale
from .mesh import Profile, RadialGrid, build_grid, l2_norm
from .spectrum import EigenPair, coupling_C, count_below, eigen_lambda, eigenvalues
from .system import Params

EPS_START = 1e-4
C_CAP = 1e8
KAPPA_TOL = 1e-13


class RegionVerdict(enum.Enum):
    NoPositiveSolution = "NoPositiveSolution"
    PositiveGroundState = "PositiveGroundState"
    ExistsSymmetric = "ExistsSymmetric"
    Unknown = "Unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class BifurcationPoint:
    """A root ``κ_j(β)`` of ``λ_j(κ) = f(β)`` on the T⁺ branch.

    Attributes:
        j: Eigenvalue index (1-based).
        beta: Coupling β.
        kappa_j: The bifurcation value of κ.
        pair: T⁺ pair at ``kappa_j`` on its native grid.
        kernel_phi: Eigenprofile ``φ_j`` in the unscaled variable ``y = √(1+κ) x``,
            normalized by ``∫ω²φ² = 1``. On the native grid of ``pair`` the node
            values of ``φ_j(√(1+κ) x)`` coincide with these.
        eigenvalue: ``λ_j(kappa_j)``.
        beyond_unit_interval: ``kappa_j > 0``; such roots are conditional.
    """

    j: int
    beta: float
    kappa_j: float
    pair: tuple
    kernel_phi: Profile
    eigenvalue: float
    beyond_unit_interval: bool
    eigen_residual: float = float("nan")

    @property
    def in_unit_interval(self) -> bool:
        return -1.0 < self.kappa_j <= 0.0

    @property
    def grid(self) -> RadialGrid:
        return self.pair[0].grid


def f_of_beta(beta: float) -> float:
    """Bifurcation threshold ``(3-β)/(1+β)``."""
    if not beta > -1:
        raise ValueError(f"f(β) needs β > -1, got {beta}")
    return (3.0 - beta) / (1.0 + beta)


def native_grid(gs: GroundState, scale: float) -> RadialGrid:
    """Grid on which ``ω(scale·x)`` is sampled exactly at ω's own nodes."""
    g = gs.grid
    return build_grid(g.dim, g.radius / scale, g.n)


def _branch_pair(gs, amp, scale, sign, grid):
    if grid is None:
        grid = native_grid(gs, scale)
        w = gs.omega.values
    else:
        w = rescale(gs, scale, grid).values
    u = Profile(grid, amp * w)
    return u, Profile(grid, sign * amp * w)


def synchronized_plus(kappa: float, beta: float, gs: GroundState,
                      grid: RadialGrid | None = None):
    """T⁺ pair ``u = v = √((1+κ)/(1+β)) ω(√(1+κ) x)``.

    Without ``grid`` the pair lives on :func:`native_grid`, where it is an
    exact discrete solution. With ``grid`` ω is interpolated onto it.
    """
    if not (kappa > -1 and beta > -1):
        raise ValueError(f"T⁺ needs κ > -1 and β > -1, got κ={kappa}, β={beta}")
    amp = math.sqrt((1 + kappa) / (1 + beta))
    return _branch_pair(gs, amp, math.sqrt(1 + kappa), 1.0, grid)


def synchronized_minus(kappa: float, beta: float, gs: GroundState,
                       grid: RadialGrid | None = None):
    """T⁻ pair ``u = -v = √((1-κ)/(1+β)) ω(√(1-κ) x)``."""
    if not (kappa < 1 and beta > -1):
        raise ValueError(f"T⁻ needs κ < 1 and β > -1, got κ={kappa}, β={beta}")
    amp = math.sqrt((1 - kappa) / (1 + beta))
    return _branch_pair(gs, amp, math.sqrt(1 - kappa), -1.0, grid)


def sigma_action(p: Params, u: Profile, v: Profile):
    """``(κ, β, u, v) ↦ (-κ, β, u, -v)``."""
    return replace(p, kappa=-p.kappa), u, -v


def solve_algebraic_system(kappa: float, beta: float) -> list[tuple[float, float, float]]:
    """Real solutions ``(a₁, a₂, b)`` with ``a₁a₂ ≠ 0``, ``b > 0`` of

        a₁ + κa₂ = a₁b²,  a₂ + κa₁ = a₂b²,  a₁² + βa₂² = b²,  a₂² + βa₁² = b².

    One representative per overall sign is returned (``a₁ > 0``); flipping
    both amplitudes gives the other. At ``κ = 0, β = 1`` the solutions form
    a circle ``a₁² + a₂² = 1``; only its two diagonal points are returned.
    """
    out = []
    if not beta > -1:
        return out
    for sign, b2 in ((1.0, 1 + kappa), (-1.0, 1 - kappa)):
        if b2 > 0:
            a = math.sqrt(b2 / (1 + beta))
            out.append((a, sign * a, math.sqrt(b2)))
    return out


# -- bifurcation points --------------------------------------------------------

def _lam(gs, kappa, j):
    return float(eigenvalues(gs, kappa, j)[j - 1])


def _bracket_low(gs, j, f):
    """A κ near -1 with ``λ_j(κ) > f``, or None once C(κ) passes the cap."""
    eps = EPS_START
    while True:
        k = -1.0 + eps
        if _lam(gs, k, j) > f:
            return k
        if coupling_C(k) > C_CAP:
            return None
        eps /= 10.0


def _bisect(gs, j, f, lo, hi):
    # invariant: λ_j(lo) > f >= λ_j(hi)
    while hi - lo > KAPPA_TOL * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _lam(gs, mid, j) > f:
            lo = mid
        else:
            hi = mid
    # pick the endpoint closer to the root
    return lo if abs(_lam(gs, lo, j) - f) < abs(_lam(gs, hi, j) - f) else hi


def find_bifurcation_kappas(gs: GroundState, beta: float, j_max: int,
                            kappa_hi: float = 1.0) -> list[BifurcationPoint]:
    """Roots of ``λ_j(κ) = f(β)`` on ``(-1, kappa_hi]`` for ``j ≤ j_max``.

    Each ``λ_j`` is strictly decreasing, so bisection on a bracket
    ``[-1+ε, kappa_hi]`` finds the unique root when one exists; ε starts at
    1e-4 and shrinks until ``λ_j(-1+ε) > f`` or ``C(-1+ε)`` exceeds 1e8.
    """
    f = f_of_beta(beta)
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    if not kappa_hi > -1:
        raise ValueError(f"κ_hi must exceed -1, got {kappa_hi}")
    out = []
    lam_hi = eigenvalues(gs, kappa_hi, j_max)
    for j in range(1, j_max + 1):
        if lam_hi[j - 1] > f:
            # λ_j > f on the whole interval, and so is every later λ
            break
        lo = _bracket_low(gs, j, f)
        if lo is None:
            continue
        kj = _bisect(gs, j, f, lo, kappa_hi)
        pair: EigenPair = eigen_lambda(gs, kj, j)[j - 1]
        out.append(BifurcationPoint(
            j=j, beta=float(beta), kappa_j=float(kj),
            pair=synchronized_plus(kj, beta, gs),
            kernel_phi=pair.phi, eigenvalue=pair.eigenvalue,
            beyond_unit_interval=kj > 0, eigen_residual=pair.residual,
        ))
    return sorted(out, key=lambda bp: bp.kappa_j)


def count_bifurcations_in_unit_interval(gs: GroundState, beta: float) -> int:
    """``#{i : λ_i(0) ≤ f(β)}``, the number of roots in ``(-1, 0]``."""
    f = f_of_beta(beta)
    # λ_i(0) = f counts; allow for the rounding in λ_1(0) = 1 at β = 1
    return count_below(gs, 0.0, f + 1e-10 * max(1.0, f))


def branch_l2_norm(bp: BifurcationPoint) -> float:
    """``‖u‖_{L²}`` of the T⁺ component at the bifurcation point."""
    return l2_norm(bp.grid, bp.pair[0])


# -- region classification ------------------------------------------------------

def beta_bar(mu1: float, mu2: float) -> float:
    """``β̄ = -(μ₁²μ₂)^{1/3}``."""
    return -np.cbrt(mu1 * mu1 * mu2)


def classify_region(p: Params) -> RegionVerdict:
    """Existence verdict for positive solutions at ``p``.

    Only regions covered by a proof are classified: nonexistence for
    ``κ < -1, β ≥ β̄`` or ``κ = -1, β > 0``; a positive ground state for
    ``κ ∈ (-1, 0), β > 0``; for ``μ₁ = μ₂`` a positive (symmetric) solution
    for ``-1 < κ ≤ 0`` or ``κ > -1, β > -1``. Everything else is Unknown.
    """
    k, b = p.kappa, p.beta
    if (k < -1 and b >= beta_bar(p.mu1, p.mu2)) or (k == -1 and b > 0):
        return RegionVerdict.NoPositiveSolution
    if -1 < k < 0 and b > 0:
        return RegionVerdict.PositiveGroundState
    if p.mu1 == p.mu2 and ((-1 < k <= 0) or (k > -1 and b > -1)):
        return RegionVerdict.ExistsSymmetric
    return RegionVerdict.Unknown


def classify_opposite_sign(p: Params) -> RegionVerdict:
    """Verdict for solutions with ``u > 0 > v``, via σ: ``classify_region(-κ)``."""
    return classify_region(replace(p, kappa=-p.kappa))
