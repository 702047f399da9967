import math

import numpy as np
import pytest
import scipy.linalg as sla
from scipy.sparse.linalg import eigsh

from schro.branches import find_bifurcation_kappas
from schro.ground_state import solve_ground_state
from schro.mesh import Profile, build_grid, integrate
from schro.spectrum import (coupling_C, count_below, eigen_lambda, eigenvalues,
                            lambda1_lower_bound, morse_index_on_branch, rayleigh_J)
from schro.system import Params, jacobian
from schro.verify import poschl_teller


def test_coupling_C_examples():
    assert coupling_C(0.0) == 1.0
    assert coupling_C(-0.6) == pytest.approx(4.0)
    ks = np.linspace(-0.999, 3, 50)
    C = [coupling_C(k) for k in ks]
    assert all(b < a for a, b in zip(C, C[1:]))
    assert coupling_C(-1 + 1e-9) > 1e9
    for bad in (-1.0, -2.0):
        with pytest.raises(ValueError):
            coupling_C(bad)


def _dense_oracle(gs, kappa, m):
    """Independent assembly: dense matrices, Robin row, Schur complement, LAPACK sygvd.

    The ω² weight is nearly singular in the tail, so the reciprocal pencil
    ``Bx = μAx`` (A positive definite for C > 0) is solved and ``λ = 1/μ``.
    """
    g = gs.grid
    n, h, N = g.n, g.h, g.dim
    sf = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi}[N]
    r = np.arange(n) * h
    A = np.zeros((n, n))
    for i in range(n - 1):
        s = sf * (r[i] + h / 2) ** (N - 1) / h
        A[i, i] += s
        A[i + 1, i + 1] += s
        A[i, i + 1] -= s
        A[i + 1, i] -= s
    C = (1 - kappa) / (1 + kappa)
    lo = np.maximum(r - h / 2, 0)
    hi = np.minimum(r + h / 2, r[-1])
    vol = sf * (hi**N - lo**N) / N
    A += np.diag(C * vol)
    gamma = math.sqrt(max(C, 0)) + (N - 1) / (2 * r[-1])
    A[-1, -1] += gamma * sf * r[-1] ** (N - 1)
    Ai = A[:-1, :-1] - np.outer(A[:-1, -1], A[-1, :-1]) / A[-1, -1]
    B = np.diag((vol * gs.omega.values**2)[:-1])
    k = Ai.shape[0]
    mu = sla.eigh(B, Ai, eigvals_only=True, subset_by_index=(k - m, k - 1))
    return np.sort(1 / mu)


@pytest.fixture(scope="module")
def small1():
    return solve_ground_state(build_grid(1, 15.0, 301))


@pytest.fixture(scope="module")
def small3():
    return solve_ground_state(build_grid(3, 20.0, 401))


@pytest.mark.parametrize("kappa", [-0.9, -0.3, 0.0, 0.4, 0.95])
@pytest.mark.parametrize("which", ["small1", "small3"])
def test_matches_dense_oracle(kappa, which, request):
    gs = request.getfixturevalue(which)
    ours = eigenvalues(gs, kappa, 5)
    ref = _dense_oracle(gs, kappa, 5)
    assert np.allclose(ours, ref, rtol=1e-9, atol=1e-9)
    full = [p.eigenvalue for p in eigen_lambda(gs, kappa, 5)]
    assert np.allclose(full, ref, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_principal_pair_at_zero(dim, request):
    gs = request.getfixturevalue(f"gs{dim}")
    p = eigen_lambda(gs, 0.0, 1)[0]
    assert p.eigenvalue == pytest.approx(1.0, abs=1e-6)
    g = gs.grid
    w = gs.omega.values
    # φ is ω normalized by ∫ω²φ² = 1, i.e. ω / sqrt(∫ω⁴)
    ref = w / math.sqrt(integrate(g, w**4))
    assert np.max(np.abs(p.phi.values - ref)) < 1e-6 * ref.max()


@pytest.fixture(scope="module")
def fine1():
    return solve_ground_state(build_grid(1, 15.0, 80001))


def test_poschl_teller_at_zero(fine1):
    lam = eigenvalues(fine1, 0.0, 4)
    assert np.allclose(lam, [1, 6, 15, 28], atol=1e-5)


@pytest.mark.parametrize("kappa", [-0.9, -0.5, 0.0, 0.5])
def test_poschl_teller_general(fine1, kappa):
    lam = eigenvalues(fine1, kappa, 4)
    exact = [poschl_teller(j, kappa) for j in range(1, 5)]
    assert np.allclose(lam, exact, atol=1e-5)


@pytest.mark.parametrize("kappa", [-0.7, 0.0, 0.6, 1.5])
@pytest.mark.parametrize("dim", [1, 3])
def test_eigenpair_invariants(dim, kappa, request):
    gs = request.getfixturevalue(f"gs{dim}")
    g = gs.grid
    pairs = eigen_lambda(gs, kappa, 4)
    w2 = gs.omega.values ** 2
    lam = [p.eigenvalue for p in pairs]
    assert all(b - a > 1e-6 for a, b in zip(lam, lam[1:]))
    for p in pairs:
        assert p.residual <= 1e-6
        assert p.phi.values[0] > 0
    G = np.array([[integrate(g, w2 * a.phi.values * b.phi.values) for b in pairs] for a in pairs])
    assert np.allclose(G, np.eye(4), atol=1e-8)


def test_eigen_lambda_preconditions(gs1):
    with pytest.raises(ValueError):
        eigen_lambda(gs1, -1.0, 2)
    with pytest.raises(ValueError):
        eigen_lambda(gs1, 0.0, gs1.grid.n // 10 + 1)
    with pytest.raises(ValueError):
        eigen_lambda(gs1, 0.0, 0)


def test_count_below_agrees_with_eigenvalues(gs3):
    lam = eigenvalues(gs3, -0.4, 6)
    for k in range(6):
        assert count_below(gs3, -0.4, lam[k] - 1e-6) == k
        assert count_below(gs3, -0.4, lam[k] + 1e-6) == k + 1


def test_rayleigh_quotient(gs2):
    g = gs2.grid
    assert rayleigh_J(gs2, gs2.omega, 0.0) == pytest.approx(1.0, abs=1e-6)
    rng = np.random.default_rng(3)
    r = g.nodes
    for _ in range(5):
        phi = Profile(g, np.exp(-r / rng.uniform(0.5, 3)) * (1 + rng.normal() * r))
        j = rayleigh_J(gs2, phi, 0.3)
        assert rayleigh_J(gs2, phi * -2.5, 0.3) == pytest.approx(j, rel=1e-12)
        ks = np.sort(rng.uniform(-0.9, 1.5, 6))
        vals = [rayleigh_J(gs2, phi, k) for k in ks]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        assert j >= eigenvalues(gs2, 0.3, 1)[0] - 1e-9
    with pytest.raises(ValueError):
        rayleigh_J(gs2, Profile(g, np.zeros(g.n)), 0.0)


def test_lambda1_lower_bound_examples(gs1):
    assert lambda1_lower_bound(gs1, 0.0) == pytest.approx(1.0, abs=1e-6)
    assert lambda1_lower_bound(gs1, -0.5) == pytest.approx(2.0, abs=1e-5)
    assert lambda1_lower_bound(gs1, -0.5) <= poschl_teller(1, -0.5)
    assert lambda1_lower_bound(gs1, -1 + 1e-8) > 1e7


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_lambda1_lower_bound_holds_where_defined(dim, request):
    gs = request.getfixturevalue(f"gs{dim}")
    for k in np.linspace(-0.95, 1.0, 25):
        assert eigenvalues(gs, k, 1)[0] >= lambda1_lower_bound(gs, k) - 1e-8


@pytest.mark.parametrize("dim", [2, 3])
def test_monotone_and_hellmann_feynman_slope(dim, request):
    """λ_j decreases in κ, and at least as fast as C(κ)/|ω|²_∞.

    dλ/dC = ∫φ²/∫ω²φ² ≥ 1/|ω|²_∞, so the drop over [κ_a, κ_b] is bounded
    below by the drop of C/|ω|²_∞.
    """
    gs = request.getfixturevalue(f"gs{dim}")
    s2 = gs.center_value**2
    ks = np.linspace(-0.95, 1.0, 30)
    lam = np.array([eigenvalues(gs, k, 4) for k in ks])
    C = np.array([coupling_C(k) for k in ks])
    drops = lam[:-1] - lam[1:]
    assert np.all(drops > 1e-8)
    assert np.all(drops >= ((C[:-1] - C[1:]) / s2)[:, None] - 1e-9)


def test_morse_sum_block_constant(gs3):
    blocks = {morse_index_on_branch(gs3, k, 0.0).sum_block for k in (-0.5, 0.0, 0.5)}
    assert blocks == {1}


def test_morse_index_nondecreasing(gs1):
    idx = [morse_index_on_branch(gs1, k, 0.0).index for k in np.linspace(-0.9, 0.9, 51)[1:]]
    assert all(b >= a for a, b in zip(idx, idx[1:]))
    rep = morse_index_on_branch(gs1, 0.3, 0.0)
    assert rep.index == len(rep.negative_eigenvalues)
    assert all(x < 0 for x in rep.negative_eigenvalues)


@pytest.mark.parametrize("beta", [0.0, -0.5])
def test_difference_block_jumps_at_bifurcations(gs3, beta):
    for bp in find_bifurcation_kappas(gs3, beta, 2):
        lo = morse_index_on_branch(gs3, bp.kappa_j - 1e-2, beta)
        hi = morse_index_on_branch(gs3, bp.kappa_j + 1e-2, beta)
        assert hi.difference_block - lo.difference_block == 1
        assert hi.sum_block == lo.sum_block


def test_morse_preconditions(gs1):
    with pytest.raises(ValueError):
        morse_index_on_branch(gs1, -1.0, 0.0)
    with pytest.raises(ValueError):
        morse_index_on_branch(gs1, 0.0, -1.0)


@pytest.mark.parametrize("beta", [0.0, -0.5])
def test_kernel_of_full_linearization_is_antisymmetric(gs1, beta):
    bp = find_bifurcation_kappas(gs1, beta, 1)[0]
    u, v = bp.pair
    g = u.grid
    J = jacobian(Params(bp.kappa_j, beta, dim=1), g, u, v)
    M = np.repeat(g.weights[:-1], 2)
    # J z = μ M z, smallest |μ|
    Minv = 1 / np.sqrt(M)
    S = (J.multiply(Minv[:, None]).multiply(Minv[None, :])).tocsc()
    mu, z = eigsh(S, k=1, sigma=0.0, which="LM")
    z = z[:, 0] * Minv
    phi, psi = z[0::2], z[1::2]
    assert abs(mu[0]) < 1e-6
    assert np.linalg.norm(phi + psi) <= 1e-5 * np.linalg.norm(phi)
