"""Newton solves, branch switching and pseudo-arclength continuation in κ.

All solves work on one fixed grid (usually the native grid of the T⁺ pair at
the bifurcation point, where that pair is an exact discrete solution). The
unknown vector interleaves the interior node values of u and v; the bordered
systems append κ as one extra unknown.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, onenormest, splu

from .branches import BifurcationPoint, sigma_action, synchronized_plus
from .errors import NumericalFailure, SingularJacobian
from .mesh import Profile, RadialGrid, l2_norm, pair_norm
from .nehari import energy_I
from .system import (Params, gradient_vectors, interleave, jacobian, kappa_derivative,
                     residual_norm, split)

MAX_NEWTON = 50
COND_LIMIT = 1e14


class NewtonFailure(NumericalFailure):
    """Damped Newton did not converge."""


class Termination(enum.Enum):
    StepLimit = "StepLimit"
    LeftParameterWindow = "LeftParameterWindow"
    NewtonFailure = "NewtonFailure"
    ReconnectedToTrivial = "ReconnectedToTrivial"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class BranchPoint:
    """One converged solution ``(κ, u, v)``.

    Attributes:
        kappa: Parameter value.
        pair: ``(u, v)``.
        residual: L² norm of the strong residual.
        asymmetry: ``‖u - v‖_{L²}``.
        positive: Both components strictly positive at interior nodes.
        arclength: Position along the traced segment.
        iterations: Newton iterations used.
        quadratic: Whether the last steps showed quadratic convergence.
        residual_history: Residual after each Newton iterate.
    """

    kappa: float
    pair: tuple
    residual: float
    asymmetry: float
    positive: bool
    arclength: float = 0.0
    iterations: int = 0
    quadratic: bool = True
    residual_history: tuple = field(default=(), repr=False)

    @property
    def grid(self) -> RadialGrid:
        return self.pair[0].grid

    @property
    def pair_norm(self) -> float:
        return pair_norm(self.grid, *self.pair)


@dataclass(frozen=True)
class BranchSegment:
    beta: float
    origin: BifurcationPoint | None
    points: tuple
    termination: Termination
    params: Params | None = None


# -- helpers --------------------------------------------------------------------

def _interior(grid, u, v):
    return interleave(np.asarray(u.values[:-1] if isinstance(u, Profile) else u[:-1]),
                      np.asarray(v.values[:-1] if isinstance(v, Profile) else v[:-1]))


def _pair(grid, x):
    u, v = split(x, grid.n)
    return Profile(grid, u), Profile(grid, v)


def _F(p, grid, x, cutoff):
    u, v = split(x, grid.n)
    Fu, Fv = gradient_vectors(p, grid, u, v, cutoff)
    return interleave(Fu[:-1], Fv[:-1])


def _rnorm(grid, F):
    W = np.repeat(grid.weights[:-1], 2)
    return math.sqrt(float(np.sum(F * F / W)))


def is_positive(u: Profile, v: Profile) -> bool:
    return bool(np.all(u.values[:-1] > 0) and np.all(v.values[:-1] > 0))


def make_point(p: Params, u: Profile, v: Profile, cutoff: bool = False, arclength=0.0,
               iterations=0, quadratic=True, history=()) -> BranchPoint:
    grid = u.grid
    return BranchPoint(
        kappa=float(p.kappa), pair=(u, v),
        residual=residual_norm(p, grid, u, v, cutoff),
        asymmetry=l2_norm(grid, u - v), positive=is_positive(u, v),
        arclength=float(arclength), iterations=iterations, quadratic=quadratic,
        residual_history=tuple(history),
    )


def _factor(J):
    try:
        lu = splu(J.tocsc())
    except RuntimeError as exc:  # "Factor is exactly singular"
        raise SingularJacobian(f"Jacobian is singular: {exc}", condition=math.inf) from exc
    return lu


def condition_estimate(J: sp.spmatrix, lu=None) -> float:
    """1-norm condition estimate ``‖J‖₁‖J⁻¹‖₁``."""
    J = J.tocsc()
    lu = lu or splu(J)
    n = J.shape[0]
    inv = LinearOperator((n, n), matvec=lu.solve, rmatvec=lambda y: lu.solve(y, trans="T"),
                         dtype=float)
    return float(abs(J).sum(axis=0).max()) * onenormest(inv)


def _quadratic_tail(history, floor: float = 1e-8) -> bool:
    """Observed order ``log(r₂/r₁)/log(r₁/r₀)`` of the last three residuals is at least 1.5.

    Residuals below ``floor`` are dominated by rounding in the stiffness
    matrix and are dropped before the estimate.
    """
    h = [r for r in history if r >= floor]
    if len(h) < 3:
        return True
    r0, r1, r2 = h[-3:]
    if not r1 < r0:
        return False
    return math.log(r2 / r1) / math.log(r1 / r0) >= 1.5


# -- Newton -----------------------------------------------------------------------

def newton_solve(p: Params, init, cutoff: bool = False, tol: float = 1e-9,
                 max_iter: int = MAX_NEWTON) -> BranchPoint:
    """Damped Newton for the system (or its cutoff variant) at fixed ``p``.

    Raises:
        SingularJacobian: The Newton matrix is singular or its condition
            estimate exceeds 1e14.
        NewtonFailure: No convergence within ``max_iter`` damped steps.
    """
    if not 0 < tol <= 1e-6:
        raise ValueError(f"tol must lie in (0, 1e-6], got {tol}")
    u0, v0 = init
    grid = u0.grid
    x = _interior(grid, u0, v0)
    F = _F(p, grid, x, cutoff)
    r = _rnorm(grid, F)
    history = [r]
    it = 0
    while r > tol:
        if it >= max_iter:
            raise NewtonFailure(f"Newton did not converge in {max_iter} steps",
                                residual_history=history)
        J = jacobian(p, grid, *split(x, grid.n), cutoff=cutoff)
        lu = _factor(J)
        dx = lu.solve(-F)
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian("Newton step is not finite",
                                   condition=condition_estimate(J, lu))
        t = 1.0
        while True:
            xt = x + t * dx
            Ft = _F(p, grid, xt, cutoff)
            rt = _rnorm(grid, Ft)
            if rt < (1 - 1e-4 * t) * r or t < 1e-4:
                break
            t *= 0.5
        if t < 1e-4 and rt >= r:
            cond = condition_estimate(J, lu)
            if cond > COND_LIMIT:
                raise SingularJacobian("Newton stalled at a near-singular Jacobian",
                                       condition=cond, residual_history=history)
            raise NewtonFailure("damped Newton stalled", residual_history=history)
        x, F, r = xt, Ft, rt
        history.append(r)
        it += 1
    u, v = _pair(grid, x)
    return make_point(p, u, v, cutoff, iterations=it, quadratic=_quadratic_tail(history),
                      history=history)


# -- branch switching -------------------------------------------------------------

def kernel_on_grid(bp: BifurcationPoint, grid: RadialGrid | None = None) -> Profile:
    """``φ_j(√(1+κ_j) x)`` on ``grid`` (default: the pair's native grid)."""
    from .ground_state import transfer

    grid = bp.grid if grid is None else grid
    phi = bp.kernel_phi
    if grid.n == phi.grid.n and math.isclose(grid.radius * math.sqrt(1 + bp.kappa_j),
                                             phi.grid.radius, rel_tol=1e-12):
        vals = np.array(phi.values)
        vals[-1] = 0.0
        return Profile(grid, vals)
    return transfer(phi, grid, scale=math.sqrt(1 + bp.kappa_j))


def branch_switch(bp: BifurcationPoint, eps: float):
    """Initial guess ``(u + εφ_j, v - εφ_j)`` off the T⁺ pair along the kernel."""
    u, v = bp.pair
    norm = pair_norm(u.grid, u, v)
    if not 0 <= eps <= 0.1 * norm:
        raise ValueError(f"ε must lie in [0, {0.1 * norm:.4g}], got {eps}")
    phi = kernel_on_grid(bp, u.grid)
    return u + eps * phi, v - eps * phi


def _bordered(J, col, row, corner=0.0):
    m = J.shape[0]
    B = sp.bmat([[J, sp.csc_matrix(col.reshape(m, 1))],
                 [sp.csr_matrix(row.reshape(1, m)), sp.csr_matrix([[corner]])]],
                format="csc")
    return B


def _bordered_newton(p, grid, x, kappa, constraint, cutoff, tol, max_iter=MAX_NEWTON):
    """Newton on ``F(x, κ) = 0, g(x, κ) = 0`` with a linear constraint.

    ``constraint`` is ``(a_x, a_k, c)`` meaning ``a_x·x + a_k κ = c``.
    """
    a_x, a_k, c = constraint
    history = []
    for it in range(max_iter + 1):
        pk = p.with_kappa(kappa)
        F = _F(pk, grid, x, cutoff)
        g = float(np.dot(a_x, x) + a_k * kappa - c)
        r = _rnorm(grid, F)
        history.append(r)
        if r <= tol and abs(g) <= 1e-12 * max(1.0, abs(c)):
            return x, kappa, it, history
        if it == max_iter or not np.isfinite(r):
            break
        J = jacobian(pk, grid, *split(x, grid.n), cutoff=cutoff)
        B = _bordered(J, kappa_derivative(grid, *split(x, grid.n)), a_x, a_k)
        lu = _factor(B)
        d = lu.solve(-np.append(F, g))
        if not np.all(np.isfinite(d)):
            raise SingularJacobian("bordered Newton step is not finite")
        x = x + d[:-1]
        kappa = kappa + d[-1]
        if len(history) > 2 and r > 10 * history[0]:
            break
    raise NewtonFailure("bordered Newton did not converge", residual_history=history)


def switch_onto_branch(bp: BifurcationPoint, eps: float, params: Params | None = None,
                       cutoff: bool = True, tol: float = 1e-9) -> BranchPoint:
    """Point on the bifurcating branch with kernel amplitude ``ε``.

    Solves the system together with the constraint ``⟨u - v, φ⟩ = 2ε‖φ‖²``
    (weighted by the lumped mass), leaving κ free. This pins the branch by
    its amplitude rather than by κ, so the solve stays regular at ``κ_j``.
    """
    grid = bp.grid
    p = params or Params(bp.kappa_j, bp.beta, dim=grid.dim)
    phi = kernel_on_grid(bp, grid).values[:-1]
    Wphi = grid.weights[:-1] * phi
    a_x = interleave(Wphi, -Wphi)
    target = 2 * eps * float(np.dot(Wphi, phi))
    u, v = branch_switch(bp, eps) if eps >= 0 else branch_switch_signed(bp, eps)
    x0 = _interior(grid, u, v)
    x, kappa, it, hist = _bordered_newton(p, grid, x0, bp.kappa_j, (a_x, 0.0, target),
                                          cutoff, tol)
    uu, vv = _pair(grid, x)
    return make_point(p.with_kappa(kappa), uu, vv, cutoff, iterations=it,
                      quadratic=_quadratic_tail(hist), history=hist)


def branch_switch_signed(bp: BifurcationPoint, eps: float):
    """:func:`branch_switch` allowing ``ε < 0`` (the mirror side of the branch)."""
    u, v = bp.pair
    phi = kernel_on_grid(bp, u.grid)
    return u + eps * phi, v - eps * phi


# -- pseudo-arclength ----------------------------------------------------------------

def _metric(grid):
    return np.repeat(grid.weights[:-1], 2)


def _dist(M, dx, dk):
    return math.sqrt(float(np.dot(M * dx, dx)) + dk * dk)


def _natural_tangent(p, grid, x, cutoff):
    J = jacobian(p, grid, *split(x, grid.n), cutoff=cutoff)
    z = _factor(J).solve(-kappa_derivative(grid, *split(x, grid.n)))
    return z, 1.0


def continue_branch(seg_start: BranchPoint, beta: float, step: float = 0.05,
                    max_points: int = 100, cutoff: bool = True,
                    previous: BranchPoint | None = None, direction: int = 1,
                    params: Params | None = None, origin: BifurcationPoint | None = None,
                    kappa_window: tuple = (-1.0, 2.0), norm_max: float = 1e3,
                    tol: float = 1e-9, max_step: float | None = None) -> BranchSegment:
    """Trace a solution curve in ``(κ, u, v)`` by pseudo-arclength continuation.

    The predictor is the secant through the last two points (or, for the
    first step without ``previous``, the solution of ``J ẋ = -∂_κF`` with
    ``κ̇ = direction``). The corrector is Newton on the system bordered by
    the arclength condition ``τ·(X - X_pred) = 0``. A failed corrector halves
    the step; three consecutive easy corrections (≤ 3 iterations) double it.

    Termination reasons: ``StepLimit`` when ``max_points`` are collected,
    ``LeftParameterWindow`` when the next point would leave the half-open
    ``kappa_window`` or exceed ``norm_max`` (that point is not kept), ``ReconnectedToTrivial`` when the asymmetry falls
    back below 1e-6 of the norm after the branch has left T⁺, and
    ``NewtonFailure`` when the corrector fails at the minimum step.
    """
    if not 1e-4 < step <= 0.1:
        raise ValueError(f"step must lie in (1e-4, 0.1], got {step}")
    grid = seg_start.grid
    p = params or Params(seg_start.kappa, beta, dim=grid.dim)
    M = _metric(grid)
    min_step = step / 2**10
    max_step = max_step if max_step is not None else 8 * step

    x1 = _interior(grid, *seg_start.pair)
    k1 = seg_start.kappa
    if previous is not None:
        x0 = _interior(grid, *previous.pair)
        k0 = previous.kappa
        tx, tk = x1 - x0, k1 - k0
    else:
        tx, tk = _natural_tangent(p.with_kappa(k1), grid, x1, cutoff)
        tx, tk = direction * tx, direction * tk
    nrm = _dist(M, tx, tk)
    tx, tk = tx / nrm, tk / nrm

    s = seg_start.arclength
    points = [replace(seg_start, arclength=s)]
    h = step
    easy = 0
    max_asym = seg_start.asymmetry
    termination = Termination.StepLimit
    while len(points) < max_points:
        xp = x1 + h * tx
        kp = k1 + h * tk
        a_x = M * tx
        c = float(np.dot(a_x, xp) + tk * kp)
        try:
            x2, k2, its, hist = _bordered_newton(p, grid, xp, kp, (a_x, tk, c), cutoff, tol,
                                                 max_iter=12)
            ok = True
        except NumericalFailure:
            ok = False
        if ok:
            ds = _dist(M, x2 - x1, k2 - k1)
            # reject jumps to a different curve
            ok = ds < 2.5 * h and (np.dot(M * (x2 - x1), tx) + (k2 - k1) * tk) > 0
        if not ok:
            h *= 0.5
            easy = 0
            if h < min_step:
                termination = Termination.NewtonFailure
                break
            continue
        u, v = _pair(grid, x2)
        norm = pair_norm(grid, u, v)
        if not kappa_window[0] < k2 <= kappa_window[1] or norm > norm_max:
            termination = Termination.LeftParameterWindow
            break
        s += ds
        pt = make_point(p.with_kappa(k2), u, v, cutoff, arclength=s, iterations=its,
                        quadratic=_quadratic_tail(hist), history=hist)
        points.append(pt)
        max_asym = max(max_asym, pt.asymmetry)
        tx, tk = (x2 - x1) / ds, (k2 - k1) / ds
        x1, k1 = x2, k2
        easy = easy + 1 if its <= 3 else 0
        if easy >= 3:
            h = min(2 * h, max_step)
            easy = 0
        if norm < 1e-6 or (max_asym > 1e-3 * (1 + norm)
                           and pt.asymmetry < 1e-6 * (1 + norm)):
            termination = Termination.ReconnectedToTrivial
            break
    return BranchSegment(beta=float(beta), origin=origin, points=tuple(points),
                         termination=termination, params=p)


def trace_from_bifurcation(bp: BifurcationPoint, eps: float | None = None,
                           step: float = 0.05, max_points: int = 60, cutoff: bool = True,
                           side: int = 1, params: Params | None = None,
                           **kwargs) -> BranchSegment:
    """Switch onto the branch at ``bp`` and continue it away from T⁺.

    The first two points are pinned by kernel amplitudes ``ε`` and ``2ε``
    (sign given by ``side``); the secant through them orients the
    pseudo-arclength trace. The T⁺ pair at ``κ_j`` is not part of the
    returned points.
    """
    grid = bp.grid
    p = params or Params(bp.kappa_j, bp.beta, dim=grid.dim)
    if eps is None:
        eps = 1e-2 * pair_norm(grid, *bp.pair)
    e = side * abs(eps)
    first = switch_onto_branch(bp, e, p, cutoff)
    second = switch_onto_branch(bp, 2 * e, p, cutoff)
    second = replace(second, arclength=_dist(
        _metric(grid), _interior(grid, *second.pair) - _interior(grid, *first.pair),
        second.kappa - first.kappa))
    seg = continue_branch(second, bp.beta, step=step, max_points=max_points - 1,
                          cutoff=cutoff, previous=first, params=p, origin=bp, **kwargs)
    return replace(seg, points=(first,) + seg.points)


def verify_cutoff_equivalence(p: Params, bp: BranchPoint, tol: float = 1e-8) -> bool:
    """Whether a cutoff-system solution also solves the uncut system."""
    u, v = bp.pair
    scale = 1.0 + pair_norm(u.grid, u, v)
    return residual_norm(p.with_kappa(bp.kappa), u.grid, u, v, cutoff=False) <= tol * scale


def sigma_image(p: Params, bp: BranchPoint) -> tuple[Params, Profile, Profile]:
    """σ applied to a branch point: parameters at ``-κ`` and the pair ``(u, -v)``."""
    return sigma_action(p.with_kappa(bp.kappa), *bp.pair)


def point_energy(p: Params, bp: BranchPoint) -> float:
    return energy_I(p.with_kappa(bp.kappa), *bp.pair)


def synchronized_point(kappa: float, beta: float, gs, grid=None) -> BranchPoint:
    """T⁺ as a :class:`BranchPoint`."""
    u, v = synchronized_plus(kappa, beta, gs, grid)
    return make_point(Params(kappa, beta, dim=u.grid.dim), u, v)
