"""Positive radial ground state of ``-Δω + ω = ω^3``.

The solve runs in two stages. A shooting pass integrates the radial ODE from
the origin with classical RK4 and bisects the central amplitude on the
overshoot/undershoot dichotomy. Its profile then seeds a Newton iteration on
the grid operator of :mod:`schro.mesh`, so that the stored ω is a discrete
zero of the same operator used everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.linalg import solve_banded

from .errors import ConfigurationError, NumericalFailure
from .mesh import Profile, RadialGrid, build_grid, stiffness_bands, values_on

SHOOT_BRACKET = (1.0, 10.0)
SHOOT_STEP = 0.01

# default truncation: R=15 for N=1, R=20 otherwise, h=0.01
DEFAULT_GRIDS = {1: (15.0, 1501), 2: (20.0, 2001), 3: (20.0, 2001)}


def default_grid(dim: int) -> RadialGrid:
    R, n = DEFAULT_GRIDS[dim]
    return build_grid(dim, R, n)


@dataclass(frozen=True)
class GroundState:
    """Discrete ground state on ``omega.grid``.

    Attributes:
        omega: The profile, zero at the truncation radius.
        center_value: ``ω(0) = |ω|_∞``.
        residual_norm: L² norm of ``-Δω + ω - ω³`` on the grid.
        shooting_amplitude: Central value found by the shooting stage.
    """

    omega: Profile
    center_value: float
    residual_norm: float
    shooting_amplitude: float = float("nan")

    @property
    def grid(self) -> RadialGrid:
        return self.omega.grid

    @property
    def dim(self) -> int:
        return self.omega.grid.dim


# -- shooting -----------------------------------------------------------------

def _rhs(r, y, p, nm1):
    return p, -nm1 / r * p + y - y * y * y


def _shoot(a, dim, step, r_max, record=False):
    """Integrate from the origin with ``ω(0)=a``.

    Returns ``(verdict, rs, ys)`` where verdict is +1 for overshoot (ω
    crosses zero), -1 for undershoot (ω' turns positive, or ω never crosses
    zero before ``r_max``).
    """
    nm1 = dim - 1
    c = (a - a**3) / dim
    r = step
    y = a + 0.5 * c * r * r
    p = c * r
    rs, ys = ([0.0, r], [a, y]) if record else (None, None)
    h = step
    nsteps = int(r_max / step)
    for _ in range(nsteps):
        k1y, k1p = _rhs(r, y, p, nm1)
        k2y, k2p = _rhs(r + h / 2, y + h / 2 * k1y, p + h / 2 * k1p, nm1)
        k3y, k3p = _rhs(r + h / 2, y + h / 2 * k2y, p + h / 2 * k2p, nm1)
        k4y, k4p = _rhs(r + h, y + h * k3y, p + h * k3p, nm1)
        y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        r += h
        if y < 0:
            return 1, rs, ys
        if p > 0:
            return -1, rs, ys
        if record:
            rs.append(r)
            ys.append(y)
    return -1, rs, ys


def shooting_amplitude(dim: int, step: float = SHOOT_STEP, r_max: float = 40.0,
                       width: float = 1e-12) -> float:
    """Central amplitude ``ω(0)`` by RK4 shooting and bisection.

    Independent of any grid, so it doubles as an oracle for the
    grid-Newton stage.
    """
    lo, hi = SHOOT_BRACKET
    if _shoot(lo, dim, step, r_max)[0] != -1 or _shoot(hi, dim, step, r_max)[0] != 1:
        raise ConfigurationError(
            f"no overshoot/undershoot bracket for N={dim} in a ∈ {SHOOT_BRACKET}"
        )
    while hi - lo >= width:
        mid = 0.5 * (lo + hi)
        if _shoot(mid, dim, step, r_max)[0] > 0:
            hi = mid
        else:
            lo = mid
        if mid in (lo, hi) and hi - lo < 4 * math.ulp(mid):
            break
    return 0.5 * (lo + hi)


def _shooting_profile(a, grid, step):
    _, rs, ys = _shoot(a, grid.dim, step, grid.radius + step, record=True)
    rs, ys = np.asarray(rs), np.asarray(ys)
    # The shot trajectory peels away from ω once shooting error dominates;
    # keep it while ω is still comfortably above that level.
    keep = ys > 1e-6 * a
    rs, ys = rs[keep], ys[keep]
    spline = CubicSpline(rs, ys)
    r = grid.nodes
    out = np.empty_like(r)
    inside = r <= rs[-1]
    out[inside] = spline(r[inside])
    # exponential tail ω ~ r^{-(N-1)/2} e^{-r}
    tail = ~inside
    r0, y0 = rs[-1], ys[-1]
    k = (grid.dim - 1) / 2
    out[tail] = y0 * np.exp(-(r[tail] - r0)) * (r0 / r[tail]) ** k
    out[-1] = 0.0
    return out


# -- grid Newton --------------------------------------------------------------

def scalar_residual(grid: RadialGrid, w: np.ndarray) -> np.ndarray:
    """Nodal ``-Δω + ω - ω³`` (zero at the Dirichlet node)."""
    d, off = stiffness_bands(grid)
    x = w[:-1]
    Kx = d * x
    Kx[:-1] += off * x[1:]
    Kx[1:] += off * x[:-1]
    res = np.zeros(grid.n)
    res[:-1] = Kx / grid.weights[:-1] + x - x**3
    return res


def _l2(grid, res):
    return math.sqrt(float(np.dot(grid.weights, res * res)))


def newton_scalar(grid: RadialGrid, guess: np.ndarray, tol: float, max_iter: int = 50):
    """Newton on ``Kω + W(ω - ω³) = 0`` with a banded solve."""
    d, off = stiffness_bands(grid)
    W = grid.weights[:-1]
    x = np.array(guess[:-1], dtype=float)
    history = []
    for it in range(max_iter):
        Kx = d * x
        Kx[:-1] += off * x[1:]
        Kx[1:] += off * x[:-1]
        F = Kx + W * (x - x**3)
        rnorm = math.sqrt(float(np.sum(F * F / W)))
        history.append(rnorm)
        # rounding floor of evaluating F grows like 1/h^2
        scale = np.abs(d * x) + W * np.abs(x)
        floor = 64 * np.finfo(float).eps * math.sqrt(float(np.sum(scale * scale / W)))
        if it > 0 and rnorm <= max(tol, floor):
            break
        ab = np.zeros((3, x.size))
        ab[0, 1:] = off
        ab[1] = d + W * (1 - 3 * x**2)
        ab[2, :-1] = off
        x = x + solve_banded((1, 1), ab, -F)
    else:
        raise NumericalFailure(
            f"ground-state Newton did not reach {tol:g} in {max_iter} iterations",
            residual_history=history,
        )
    out = np.zeros(grid.n)
    out[:-1] = x
    return out, history[-1]


def solve_ground_state(grid: RadialGrid, tol: float = 1e-10,
                       shoot_step: float = SHOOT_STEP) -> GroundState:
    """Positive radial solution of ``-Δω + ω = ω³`` on ``grid``."""
    if not 0 < tol <= 1e-4:
        raise ValueError(f"tol must lie in (0, 1e-4], got {tol}")
    a = shooting_amplitude(grid.dim, step=shoot_step)
    guess = _shooting_profile(a, grid, shoot_step)
    omega, rnorm = newton_scalar(grid, guess, tol)
    inner = omega[:-1]
    if np.any(inner <= 0) or np.any(np.diff(inner) >= 0):
        raise NumericalFailure("grid ground state is not positive and decreasing",
                               center_value=float(omega[0]))
    return GroundState(Profile(grid, omega), float(omega[0]), rnorm, a)


def sup_norm(gs: GroundState) -> float:
    """``|ω|_∞``; ω decreases radially so this is the central value."""
    return gs.center_value


def rescale(gs: GroundState, s: float, grid: RadialGrid | None = None) -> Profile:
    """The profile ``r ↦ ω(s r)`` sampled on ``grid`` (default: ω's own grid).

    Uses monotone cubic (PCHIP) interpolation; zero beyond ``R/s``.
    """
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s}")
    grid = gs.grid if grid is None else grid
    return Profile(grid, interpolate_radial(gs.omega, s * grid.nodes))


def interpolate_radial(profile: Profile, r: np.ndarray) -> np.ndarray:
    """PCHIP evaluation of ``profile`` at radii ``r`` (zero outside its grid)."""
    src = profile.grid
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r <= src.radius
    out[inside] = PchipInterpolator(src.nodes, profile.values)(r[inside])
    return out


def transfer(profile: Profile, grid: RadialGrid, scale: float = 1.0) -> Profile:
    """Resample ``r ↦ profile(scale*r)`` onto another grid."""
    if grid == profile.grid and scale == 1.0:
        return profile
    vals = interpolate_radial(profile, scale * grid.nodes)
    vals[-1] = 0.0
    return Profile(grid, vals)


def omega_values(gs: GroundState) -> np.ndarray:
    return values_on(gs.grid, gs.omega)
