import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schro.branches import (RegionVerdict, branch_l2_norm, classify_opposite_sign,
                            classify_region, count_bifurcations_in_unit_interval, f_of_beta,
                            find_bifurcation_kappas, native_grid, sigma_action,
                            solve_algebraic_system, synchronized_minus, synchronized_plus)
from schro.ground_state import solve_ground_state
from schro.mesh import build_grid
from schro.spectrum import eigen_residual, eigenvalues
from schro.system import Params, relative_residual


def test_synchronized_plus_identity(gs1):
    u, v = synchronized_plus(0.0, 0.0, gs1)
    assert u.grid == gs1.grid
    assert np.array_equal(u.values, gs1.omega.values)
    assert np.array_equal(v.values, gs1.omega.values)


def test_synchronized_plus_scaling(gs3):
    u, v = synchronized_plus(-0.5, 0.0, gs3)
    assert u.values[0] == pytest.approx(math.sqrt(0.5) * gs3.center_value)
    assert u.grid.radius == pytest.approx(gs3.grid.radius / math.sqrt(0.5))
    assert relative_residual(Params(-0.5, 0.0, dim=3), u.grid, u, v) <= 1e-6
    u, v = synchronized_plus(0.0, 3.0, gs3)
    assert u.values[0] == pytest.approx(gs3.center_value / 2)


def test_synchronized_plus_on_given_grid(gs1):
    g = build_grid(1, 12.0, 1201)
    u, v = synchronized_plus(0.3, 0.2, gs1, grid=g)
    r = g.nodes
    exact = math.sqrt(1.3 / 1.2) * math.sqrt(2) / np.cosh(math.sqrt(1.3) * r)
    assert np.max(np.abs(u.values - exact)) < 1e-4


@pytest.mark.parametrize("kb", [(-1.0, 0.0), (0.0, -1.0), (-2.0, 1.0)])
def test_synchronized_plus_domain(gs1, kb):
    with pytest.raises(ValueError):
        synchronized_plus(*kb, gs1)


def test_synchronized_minus(gs1):
    u, v = synchronized_minus(0.0, 0.0, gs1)
    assert np.array_equal(u.values, gs1.omega.values)
    assert np.array_equal(v.values, -gs1.omega.values)
    for k, b in [(0.5, 0.0), (-0.7, 1.3), (0.2, -0.4)]:
        p = Params(k, b, dim=1)
        u, v = synchronized_minus(k, b, gs1)
        q, su, sv = sigma_action(Params(-k, b, dim=1), *synchronized_plus(-k, b, gs1))
        assert q == p
        assert np.array_equal(su.values, u.values) and np.array_equal(sv.values, v.values)
        assert relative_residual(p, u.grid, u, v) <= 1e-6
    u, _ = synchronized_minus(0.5, 0.0, gs1)
    assert u.values[0] == pytest.approx(math.sqrt(0.5) * gs1.center_value)
    with pytest.raises(ValueError):
        synchronized_minus(1.0, 0.0, gs1)
    with pytest.raises(ValueError):
        synchronized_minus(0.0, -1.0, gs1)


@pytest.mark.parametrize("seed", range(4))
def test_branch_residual_random(gs1, gs3, seed):
    rng = np.random.default_rng(seed)
    for gs in (gs1, gs3):
        for _ in range(5):
            k, b = rng.uniform(-0.9, 2.0), rng.uniform(-0.9, 3.0)
            u, v = synchronized_plus(k, b, gs)
            assert relative_residual(Params(k, b, dim=gs.dim), u.grid, u, v) <= 1e-6


def test_sigma_action(gs1):
    p = Params(0.3, -0.2, 1.0, 1.5, 1)
    u, v = synchronized_plus(0.3, -0.2, gs1)
    q, a, b = sigma_action(*sigma_action(p, u, v))
    assert q == p and np.array_equal(a.values, u.values) and np.array_equal(b.values, v.values)
    q, a, b = sigma_action(Params(0.3, -0.2, dim=1), u, v)
    assert np.all(a.values[:-1] > 0) and np.all(b.values[:-1] < 0)
    r0 = relative_residual(Params(0.3, -0.2, dim=1), u.grid, u, v)
    assert relative_residual(q, u.grid, a, b) == pytest.approx(r0, abs=1e-12)


def _check_algebraic(k, b, sol):
    a1, a2, bb = sol
    b2 = bb * bb
    assert a1 * a2 != 0 and bb > 0
    for lhs, rhs in [(a1 + k * a2, a1 * b2), (a2 + k * a1, a2 * b2),
                     (a1 * a1 + b * a2 * a2, b2), (a2 * a2 + b * a1 * a1, b2)]:
        assert lhs == pytest.approx(rhs, abs=1e-12 * max(1, abs(rhs)))


def test_algebraic_examples():
    sols = solve_algebraic_system(0.0, 0.0)
    assert sorted(sols) == sorted([(1.0, 1.0, 1.0), (1.0, -1.0, 1.0)])
    sols = solve_algebraic_system(-0.5, 0.0)
    assert (pytest.approx(math.sqrt(0.5)), pytest.approx(math.sqrt(0.5)),
            pytest.approx(math.sqrt(0.5))) == sols[0]
    assert sols[1] == pytest.approx((math.sqrt(1.5), -math.sqrt(1.5), math.sqrt(1.5)))
    assert solve_algebraic_system(0.3, -1.0) == []
    assert solve_algebraic_system(0.3, -3.0) == []


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-0.99, 5))
def test_algebraic_solutions_satisfy_system(k, b):
    sols = solve_algebraic_system(k, b)
    for sol in sols:
        _check_algebraic(k, b, sol)
        # the overall sign flip is also a solution
        _check_algebraic(k, b, (-sol[0], -sol[1], sol[2]))
    assert len(sols) == (1 + k > 0) + (1 - k > 0)


def test_f_of_beta():
    assert f_of_beta(0.0) == 3.0
    assert f_of_beta(1.0) == 1.0
    bs = np.linspace(-0.99, 5, 40)
    fs = [f_of_beta(b) for b in bs]
    assert all(y < x for x, y in zip(fs, fs[1:]))
    assert f_of_beta(-1 + 1e-9) > 1e9
    with pytest.raises(ValueError):
        f_of_beta(-1.0)


@pytest.fixture(scope="module")
def gs1_fine():
    return solve_ground_state(build_grid(1, 15.0, 6001))


def test_closed_form_roots(gs1_fine):
    bps = find_bifurcation_kappas(gs1_fine, 0.0, 2, kappa_hi=1.0)
    assert [bp.j for bp in bps] == [1, 2]
    assert bps[0].kappa_j == pytest.approx(-0.6, abs=1e-6)
    assert bps[1].kappa_j == pytest.approx(1.0, abs=1e-5)
    assert not bps[0].beyond_unit_interval and bps[0].in_unit_interval
    assert bps[1].beyond_unit_interval


@pytest.mark.parametrize("beta", [0.5, 0.0, -0.5, -0.9, -0.99])
@pytest.mark.parametrize("dim", [1, 3])
def test_bifurcation_point_invariants(dim, beta, request):
    gs = request.getfixturevalue(f"gs{dim}")
    bps = find_bifurcation_kappas(gs, beta, 3)
    assert bps, "at least κ₁ must exist for β below 1"
    ks = [bp.kappa_j for bp in bps]
    assert all(b > a for a, b in zip(ks, ks[1:]))
    assert [bp.j for bp in bps] == list(range(1, len(bps) + 1))
    f = f_of_beta(beta)
    for bp in bps:
        assert -1 < bp.kappa_j <= 1.0
        assert abs(eigenvalues(gs, bp.kappa_j, bp.j)[-1] - f) <= 1e-8 * max(1.0, f)
        u, v = synchronized_plus(bp.kappa_j, beta, gs)
        assert np.array_equal(bp.pair[0].values, u.values)
        assert bp.pair[0].grid == u.grid == native_grid(gs, math.sqrt(1 + bp.kappa_j))
        assert eigen_residual(gs, bp.kappa_j, f, bp.kernel_phi) <= 1e-6


def test_no_root_above_one(gs1):
    # f(β) < λ₁(κ) everywhere on (-1, 1] once β is large enough
    assert find_bifurcation_kappas(gs1, 50.0, 2) == []
    with pytest.raises(ValueError):
        find_bifurcation_kappas(gs1, -1.0, 2)
    with pytest.raises(ValueError):
        find_bifurcation_kappas(gs1, 0.0, 0)


def test_count_examples(gs1):
    assert count_bifurcations_in_unit_interval(gs1, 0.0) == 1
    assert count_bifurcations_in_unit_interval(gs1, -0.5) == 2
    assert count_bifurcations_in_unit_interval(gs1, 1.0) == 1
    assert count_bifurcations_in_unit_interval(gs1, 2.0) == 0


@pytest.mark.parametrize("dim", [1, 3])
def test_count_matches_roots_and_grows(dim, request):
    gs = request.getfixturevalue(f"gs{dim}")
    prev = 0
    for beta in (0.9, 0.5, 0.0, -0.3, -0.6, -0.8, -0.9):
        c = count_bifurcations_in_unit_interval(gs, beta)
        roots = [bp for bp in find_bifurcation_kappas(gs, beta, c + 2) if bp.kappa_j <= 0]
        assert c == len(roots)
        assert c >= prev
        prev = c


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_asymptotic_inequality(dim, request):
    gs = request.getfixturevalue(f"gs{dim}")
    s2 = gs.center_value**2
    norms = []
    for beta in (-0.3, -0.6, -0.8, -0.9):
        bp = find_bifurcation_kappas(gs, beta, 1)[0]
        k = bp.kappa_j
        assert (1 + k) / (1 + beta) >= -2 * k / (s2 * (3 - beta))
        norms.append(branch_l2_norm(bp))
    assert all(b >= 1.05 * a for a, b in zip(norms, norms[1:]))


V = RegionVerdict


@pytest.mark.parametrize("p, want", [
    (Params(-2.0, 0.0), V.NoPositiveSolution),
    (Params(-0.5, 1.0, 1.0, 2.0), V.PositiveGroundState),
    (Params(0.5, 0.5), V.ExistsSymmetric),
    (Params(-1.0, 0.5), V.NoPositiveSolution),
    (Params(-1.0, 0.0), V.Unknown),
    (Params(-2.0, -1.5), V.Unknown),
    (Params(-2.0, -1.0), V.NoPositiveSolution),
    (Params(-0.5, -3.0), V.ExistsSymmetric),
    (Params(-0.5, -3.0, 1.0, 2.0), V.Unknown),
    (Params(0.5, -0.5, 1.0, 2.0), V.Unknown),
    (Params(2.0, -2.0), V.Unknown),
    (Params(-3.0, -2.0, 1.0, 8.0), V.NoPositiveSolution),
])
def test_classify_region(p, want):
    assert classify_region(p) is want


def test_params_invariants():
    with pytest.raises(ValueError):
        Params(0.0, 0.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        Params(0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Params(0.0, 0.0, dim=4)


def test_classify_opposite_sign():
    assert classify_opposite_sign(Params(2.0, 0.0)) is V.NoPositiveSolution
    assert classify_opposite_sign(Params(0.5, 1.0)) is V.PositiveGroundState
    rng = np.random.default_rng(11)
    for _ in range(100):
        mu1 = rng.uniform(0.2, 2)
        p = Params(rng.uniform(-3, 3), rng.uniform(-3, 3), mu1, mu1 * rng.uniform(1, 3))
        q = Params(-p.kappa, p.beta, p.mu1, p.mu2)
        assert classify_opposite_sign(p) is classify_region(q)
