"""Acceptance checks with analytic or independent oracles.

Each check returns a :class:`CheckResult` listing its sub-checks, so that a
failing clause is visible next to the ones that hold. Checks time themselves
and fail when they exceed their time budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .branches import (RegionVerdict, beta_bar, branch_l2_norm, classify_opposite_sign,
                       classify_region, count_bifurcations_in_unit_interval, f_of_beta,
                       find_bifurcation_kappas, sigma_action, synchronized_minus,
                       synchronized_plus)
from .continuation import trace_from_bifurcation
from .ground_state import default_grid, solve_ground_state
from .mesh import build_grid, inner_l2, integrate, l2_norm, pair_norm
from .nehari import energy_I, gradient_I, minimize_ground_state, project
from .spectrum import coupling_C, eigen_lambda, eigenvalues, morse_index_on_branch
from .system import Params, relative_residual, residual_norm


@dataclass
class CheckResult:
    number: int
    title: str
    limit: float
    subchecks: dict = field(default_factory=dict)
    details: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def in_time(self) -> bool:
        return self.seconds < self.limit

    @property
    def passed(self) -> bool:
        return bool(self.subchecks) and all(self.subchecks.values()) and self.in_time

    def add(self, name: str, ok: bool, detail: str = ""):
        self.subchecks[name] = self.subchecks.get(name, True) and bool(ok)
        if detail:
            self.details.append(f"{name}: {detail}")

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [k for k, v in self.subchecks.items() if not v]
        if not self.in_time:
            failed.append(f"runtime {self.seconds:.1f}s >= {self.limit:g}s")
        tail = f" [failed: {', '.join(failed)}]" if failed else ""
        return f"{status} criterion {self.number:2d} ({self.seconds:6.2f}s) {self.title}{tail}"


_GS_CACHE: dict = {}


def _gs(dim, radius=None, n=None):
    if radius is None:
        g = default_grid(dim)
    else:
        g = build_grid(dim, radius, n)
    if g not in _GS_CACHE:
        _GS_CACHE[g] = solve_ground_state(g)
    return _GS_CACHE[g]


def _timed(number, title, limit):
    def wrap(fn):
        def run(*args, **kwargs):
            res = CheckResult(number, title, limit)
            t0 = time.perf_counter()
            try:
                fn(res, *args, **kwargs)
            except Exception as exc:  # a crash is a failed criterion, not a crashed suite
                res.add("completed", False, f"{type(exc).__name__}: {exc}")
            res.seconds = time.perf_counter() - t0
            return res
        run.number = number
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


# -- 1 ------------------------------------------------------------------------------

@_timed(1, "scalar ground state N=1 vs sech oracle", 5.0)
def check_ground_state_1d(res: CheckResult, n: int = 60001):
    """ω(0) = √2 within 1e-8; ‖ω‖² = ∫ω⁴ = 16/3 within 1e-4."""
    _GS_CACHE.clear()
    gs = solve_ground_state(build_grid(1, 15.0, n))
    g = gs.grid
    w = gs.omega.values
    e0 = abs(gs.center_value - math.sqrt(2))
    h1 = pair_norm(g, gs.omega, gs.omega * 0.0) ** 2
    l4 = integrate(g, w**4)
    res.add("center", e0 <= 1e-8, f"|ω(0)-√2| = {e0:.3e}")
    res.add("h1_norm", abs(h1 - 16 / 3) <= 1e-4, f"|‖ω‖²-16/3| = {abs(h1 - 16 / 3):.3e}")
    res.add("l4", abs(l4 - 16 / 3) <= 1e-4, f"|∫ω⁴-16/3| = {abs(l4 - 16 / 3):.3e}")


# -- 2 ------------------------------------------------------------------------------

@_timed(2, "principal eigenvalue λ₁(0) = 1 with eigenprofile ∝ ω", 10.0)
def check_principal_anchor(res: CheckResult, dims=(1, 2, 3)):
    for N in dims:
        gs = _gs(N)
        pair = eigen_lambda(gs, 0.0, 1)[0]
        g = gs.grid
        cos = inner_l2(g, pair.phi, gs.omega) / (l2_norm(g, pair.phi) * l2_norm(g, gs.omega))
        res.add(f"lambda_N{N}", abs(pair.eigenvalue - 1) <= 1e-6,
                f"|λ₁(0)-1| = {abs(pair.eigenvalue - 1):.3e}")
        res.add(f"cosine_N{N}", cos >= 1 - 1e-8, f"1-cos = {1 - cos:.3e}")


# -- 3 ------------------------------------------------------------------------------

def poschl_teller(j: int, kappa: float) -> float:
    """Closed-form ``λ_j(κ)`` for N=1, where ω² = 2 sech²."""
    s = math.sqrt(coupling_C(kappa))
    return (2 * j - 2 + s) * (2 * j - 1 + s) / 2


@_timed(3, "Pöschl–Teller spectrum N=1, j≤4", 10.0)
def check_poschl_teller(res: CheckResult, n: int = 80001):
    gs = _gs(1, 15.0, n)
    worst = 0.0
    for kappa in (-0.9, -0.5, 0.0, 0.5):
        lam = eigenvalues(gs, kappa, 4)
        exact = np.array([poschl_teller(j, kappa) for j in range(1, 5)])
        err = float(np.max(np.abs(lam - exact)))
        worst = max(worst, err)
        res.add(f"kappa={kappa:g}", err <= 1e-5, f"max |λ_j-exact| = {err:.3e}")
    res.details.append(f"worst error {worst:.3e}")


# -- 4 ------------------------------------------------------------------------------

@_timed(4, "bifurcation roots N=1, β=0: κ₁=-0.6, κ₂=1", 10.0)
def check_bifurcation_roots(res: CheckResult, n: int = 6001):
    gs = _gs(1, 15.0, n)
    bps = {bp.j: bp.kappa_j for bp in find_bifurcation_kappas(gs, 0.0, 2, kappa_hi=1.0)}
    k1, k2 = bps.get(1, math.nan), bps.get(2, math.nan)
    res.add("kappa1", abs(k1 + 0.6) <= 1e-6, f"κ₁ = {k1:.10f}")
    res.add("kappa2", abs(k2 - 1.0) <= 1e-5, f"κ₂ = {k2:.10f}")


# -- 5 ------------------------------------------------------------------------------

def _refine_jump(gs, j, ka, kb, la, lb, levels):
    """Largest remaining jump of λ_j after repeatedly bisecting the worst half."""
    for _ in range(levels):
        km = 0.5 * (ka + kb)
        lm = float(eigenvalues(gs, km, j)[j - 1])
        if abs(la - lm) >= abs(lm - lb):
            kb, lb = km, lm
        else:
            ka, la = km, lm
    return abs(la - lb)


@_timed(5, "eigenvalue monotonicity, continuity, Lipschitz and lower bounds", 60.0)
def check_eigen_properties(res: CheckResult, dims=(2, 3), levels: int = 14):
    kappas = np.linspace(-0.95, 2.0, 31)[1:]
    for N in dims:
        gs = _gs(N)
        s2 = gs.center_value**2
        lam = np.array([eigenvalues(gs, k, 4) for k in kappas])
        C = np.array([coupling_C(k) for k in kappas])
        drops = lam[:-1] - lam[1:]
        res.add("monotone", bool(np.all(drops > 0)),
                f"N={N} min λ_j(κ_i)-λ_j(κ_i+1) = {drops.min():.3e}")
        ratio = 0.0
        for i in range(len(kappas) - 1):
            for j in range(1, 5):
                jump = abs(drops[i, j - 1])
                if jump == 0:
                    continue
                left = _refine_jump(gs, j, kappas[i], kappas[i + 1], lam[i, j - 1],
                                    lam[i + 1, j - 1], levels)
                ratio = max(ratio, left / jump)
        # a continuous function loses its jump under bisection; a discontinuity keeps it
        res.add("continuous", ratio <= 1e-2,
                f"N={N} worst jump ratio after {levels} bisections = {ratio:.3e}")
        bound = (C[:-1] - C[1:]) / s2
        excess = drops - bound[:, None]
        tame = kappas[1:] <= 1.0
        res.add("lipschitz", bool(np.all(excess <= 1e-6)),
                f"N={N} [λ_j(κ_i)-λ_j(κ_i+1)] - [C(κ_i)-C(κ_i+1)]/|ω|² exceeds 1e-6 on "
                f"{int(np.sum(excess > 1e-6))}/{excess.size} (interval, j); "
                f"over κ ≤ 1 it lies in [{excess[tame].min():.3e}, {excess[tame].max():.3e}]")
        low = lam[:, 0] - C / s2
        bad = kappas[low < -1e-6]
        res.add("lower_bound", bad.size == 0,
                f"N={N} λ₁ < C/|ω|² at {bad.size} points"
                + (f" (κ from {bad.min():.3f}, min λ₁ = {lam[:, 0].min():.3e})" if bad.size else ""))


# -- 6 ------------------------------------------------------------------------------

@_timed(6, "synchronized branch residuals and σ-identity", 30.0)
def check_synchronized(res: CheckResult, dims=(1, 3), draws: int = 20, seed: int = 0):
    rng = np.random.default_rng(seed)
    for N in dims:
        gs = _gs(N)
        worst, sig = 0.0, 0.0
        for _ in range(draws):
            k = rng.uniform(-0.9, 2.0)
            b = rng.uniform(-0.9, 3.0)
            for kk, maker in ((k, synchronized_plus), (min(-k, 0.9), synchronized_minus)):
                u, v = maker(kk, b, gs)
                p = Params(kk, b, dim=N)
                r = relative_residual(p, u.grid, u, v)
                q, su, sv = sigma_action(p, u, v)
                rs = relative_residual(q, u.grid, su, sv)
                worst = max(worst, r)
                sig = max(sig, abs(rs - r))
        res.add("residual", worst <= 1e-6, f"N={N} worst relative residual {worst:.3e}")
        res.add("sigma", sig <= 1e-12, f"N={N} worst |res(σ·)-res| = {sig:.3e}")


# -- 7 ------------------------------------------------------------------------------

def _stated_verdicts(k, b, mu1=1.0, mu2=1.0):
    """Clause-by-clause statement of the existence results, used as the oracle.

    Returns the set of verdicts consistent with every clause that applies.
    """
    bb = -((mu1 * mu1 * mu2) ** (1 / 3))
    clauses = []
    if k < -1 and b >= bb:
        clauses.append("none")
    if k == -1 and b > 0:
        clauses.append("none")
    if -1 < k < 0 and b > 0:
        clauses.append("ground")
    if mu1 == mu2 and -1 < k <= 0:
        clauses.append("exists")
    if mu1 == mu2 and k > 0 and b > -1:
        clauses.append("exists")
    if k > -1 and b > -1 and mu1 == mu2:  # existence for every κ > -1, β > -1
        clauses.append("exists")
    if "none" in clauses:
        return {RegionVerdict.NoPositiveSolution}
    if "ground" in clauses:
        return {RegionVerdict.PositiveGroundState}
    if "exists" in clauses:
        return {RegionVerdict.ExistsSymmetric}
    return {RegionVerdict.Unknown}


def region_axis(lo: float, hi: float, count: int) -> np.ndarray:
    """Evenly spaced axis rounded to 12 decimals so that -1, 0, ... land exactly."""
    return np.round(np.linspace(lo, hi, count), 12)


PROBES = (
    (-2.0, 0.0, RegionVerdict.NoPositiveSolution),
    (-0.5, 1.0, RegionVerdict.PositiveGroundState),
    (0.5, 0.5, RegionVerdict.ExistsSymmetric),
    (-1.0, 0.5, RegionVerdict.NoPositiveSolution),
)


@_timed(7, "region classifier vs stated clauses", 5.0)
def check_region_classifier(res: CheckResult, count: int = 50):
    ks = region_axis(-2.0, 2.9, count)
    bs = region_axis(-2.0, 2.9, count)
    mism = opp = 0
    for k in ks:
        for b in bs:
            p = Params(float(k), float(b))
            if classify_region(p) not in _stated_verdicts(k, b):
                mism += 1
            # opposite-sign statements are the mirror images in κ
            if classify_opposite_sign(p) not in _stated_verdicts(-k, b):
                opp += 1
    res.add("grid", mism == 0, f"{mism} of {count * count} verdicts disagree")
    res.add("opposite_sign", opp == 0, f"{opp} opposite-sign verdicts disagree")
    for k, b, want in PROBES:
        got = classify_region(Params(k, b))
        res.add(f"probe({k:g},{b:g})", got == want, f"{got}")
    got = classify_region(Params(-0.5, 1.0, 1.0, 2.0))
    res.add("probe_mu12", got == RegionVerdict.PositiveGroundState, f"{got}")
    res.add("beta_bar", beta_bar(1, 1) == -1.0)


# -- 8 ------------------------------------------------------------------------------

@_timed(8, "Nehari minimizer κ=-0.5, β=1, N=3", 120.0)
def check_nehari(res: CheckResult, seed: int = 0):
    gs = _gs(3)
    g = gs.grid
    p = Params(-0.5, 1.0, dim=3)
    st = minimize_ground_state(p, (gs.omega, gs.omega), tol=1e-6, max_iter=5000)
    tu, tv = project(p, *synchronized_plus(-0.5, 1.0, gs, grid=g))
    e_sync = energy_I(p, tu, tv)
    res.add("converged", st.converged and st.residual <= 1e-6, f"free gradient {st.residual:.3e}")
    res.add("positive", st.positive)
    res.add("energy_positive", st.energy > 0, f"I = {st.energy:.10f}")
    res.add("below_synchronized", st.energy <= e_sync + 1e-8,
            f"I(min) - I(T⁺) = {st.energy - e_sync:.3e}")
    hist = np.asarray(st.energy_history)
    res.add("monotone_descent", bool(np.all(np.diff(hist) <= 1e-12 * abs(hist[0]))))

    rng = np.random.default_rng(seed)
    w = gs.omega.values
    u = gs.omega
    v = gs.omega * 0.7
    gu, gv = gradient_I(p, u, v)
    worst = 0.0
    h = 1e-4
    for _ in range(10):
        du = w * rng.standard_normal(g.n)
        dv = w * rng.standard_normal(g.n)
        du[-1] = dv[-1] = 0.0
        fd = (energy_I(p, u + h * du, v + h * dv) - energy_I(p, u - h * du, v - h * dv)) / (2 * h)
        an = integrate(g, gu.values * du + gv.values * dv)
        worst = max(worst, abs(fd - an) / abs(an))
    res.add("gradient_fd", worst <= 1e-5, f"worst relative mismatch {worst:.3e}")


# -- 9 ------------------------------------------------------------------------------

@_timed(9, "Morse index jumps by one across κ_j", 120.0)
def check_morse(res: CheckResult, dims=(1, 3), betas=(0.0, -0.5), delta: float = 1e-2):
    for N in dims:
        gs = _gs(N)
        for beta in betas:
            bps = find_bifurcation_kappas(gs, beta, 2)
            res.add(f"found_N{N}_b{beta:g}", len(bps) >= 1)
            for bp in bps:
                lo = morse_index_on_branch(gs, bp.kappa_j - delta, beta).index
                hi = morse_index_on_branch(gs, bp.kappa_j + delta, beta).index
                res.add(f"N{N}_b{beta:g}_j{bp.j}", hi - lo == 1,
                        f"index {lo} -> {hi} across κ={bp.kappa_j:.6f}")


# -- 10 -----------------------------------------------------------------------------

@_timed(10, "branch switching and positivity, N=1, β=-0.5", 300.0)
def check_branch(res: CheckResult, step: float = 0.02, max_points: int = 200):
    gs = _gs(1)
    beta = -0.5
    bp = find_bifurcation_kappas(gs, beta, 1)[0]
    seg = trace_from_bifurcation(bp, step=step, max_points=max_points, cutoff=True,
                                 kappa_window=(-1.0, 0.0), max_step=2.5 * step)
    pts = seg.points
    off = [q for q in pts if q.asymmetry > 1e-4]
    res.add("points", len(off) >= 30,
            f"{len(off)} of {len(pts)} points off T⁺, termination {seg.termination}")
    inside = [q for q in pts if -1 < q.kappa <= 0]
    res.add("positive", all(q.positive for q in inside),
            f"{sum(q.positive for q in inside)}/{len(inside)} positive in κ∈(-1,0]")
    worst = 0.0
    for q in pts:
        sp_, su, sv = sigma_action(Params(q.kappa, beta, dim=1), *q.pair)
        worst = max(worst, residual_norm(sp_, su.grid, su, sv) / (1 + q.pair_norm))
    res.add("sigma_residual", worst <= 1e-8, f"worst σ-image residual {worst:.3e}")
    res.details.append(f"κ range [{min(q.kappa for q in pts):.4f}, "
                       f"{max(q.kappa for q in pts):.4f}]")


# -- 11 -----------------------------------------------------------------------------

@_timed(11, "asymptotics of κ_j(β) as β → -1", 120.0)
def check_asymptotics(res: CheckResult, dims=(1, 3), betas=(-0.3, -0.6, -0.8, -0.9)):
    for N in dims:
        gs = _gs(N)
        s2 = gs.center_value**2
        k1, norms, counts = [], [], []
        kj = {1: [], 2: [], 3: []}
        for beta in betas:
            bps = find_bifurcation_kappas(gs, beta, 3)
            bp = bps[0]
            k1.append(bp.kappa_j)
            norms.append(branch_l2_norm(bp))
            counts.append(count_bifurcations_in_unit_interval(gs, beta))
            for b in bps:
                kj[b.j].append(b.kappa_j)
            lhs = (1 + bp.kappa_j) / (1 + beta)
            rhs = -2 * bp.kappa_j / (s2 * (3 - beta))
            res.add("inequality", lhs >= rhs, f"N={N} β={beta:g}: {lhs:.6f} ≥ {rhs:.6f}")
        res.add("kappa1_decreasing", all(b < a for a, b in zip(k1, k1[1:])) and k1[-1] > -1,
                f"N={N} κ₁ = {[round(x, 6) for x in k1]}")
        ratios = [b / a for a, b in zip(norms, norms[1:])]
        res.add("norm_growth", all(r >= 1.05 for r in ratios),
                f"N={N} L² ratios {[round(r, 4) for r in ratios]}")
        res.add("count_nondecreasing", all(b >= a for a, b in zip(counts, counts[1:])),
                f"N={N} counts {counts}")
        for j, ks in kj.items():
            # κ_j is only defined once f(β) has reached λ_j; it must then fall toward -1
            res.add("kappa_j_decreasing", all(b < a for a, b in zip(ks, ks[1:])),
                    f"N={N} κ_{j} = {[round(x, 6) for x in ks]}")


CHECKS: dict[int, Callable[..., CheckResult]] = {
    1: check_ground_state_1d,
    2: check_principal_anchor,
    3: check_poschl_teller,
    4: check_bifurcation_roots,
    5: check_eigen_properties,
    6: check_synchronized,
    7: check_region_classifier,
    8: check_nehari,
    9: check_morse,
    10: check_branch,
    11: check_asymptotics,
}

# analytic-oracle checks that only need N=1 data
FAST = (1, 2, 3, 4, 6, 7)
_DIM_ARGS = {2: "dims", 5: "dims", 6: "dims", 9: "dims", 11: "dims"}
_NATIVE_DIMS = {1: (1,), 3: (1,), 4: (1,), 5: (2, 3), 8: (3,), 10: (1,)}


def run_checks(fast: bool = False, dim: int | None = None, seed: int = 0):
    """Run the acceptance checks; ``dim`` restricts checks to that dimension."""
    out = []
    for num, fn in CHECKS.items():
        if fast and num not in FAST:
            continue
        kwargs = {}
        if dim is not None:
            native = _NATIVE_DIMS.get(num)
            if num in _DIM_ARGS:
                if native is not None and dim not in native:
                    continue
                kwargs["dims"] = (dim,)
            elif native is not None and dim not in native:
                continue
        if num in (6, 8):
            kwargs["seed"] = seed
        out.append(fn(**kwargs))
    return out
