import math

import numpy as np
import pytest

from emplab.distributions import DistributionSpec, NoiseSpec
from emplab.recovery import (
    RecoveryProblem,
    basis_pursuit,
    rate_penalty,
    lasso,
    lasso_objective,
    make_recovery_problem,
    recovery_experiment,
    recovery_success,
)

from _oracles import basis_pursuit_enum, lasso_kkt_enum

RNG = np.random.default_rng(9217)


def _random_sparse_instance(n, N, s, rng, noise_sd=0.0, lam=0.0):
    Gamma = rng.standard_normal((N, n))
    v0 = np.zeros(n)
    idx = rng.choice(n, s, replace=False)
    v0[idx] = rng.choice([-1.0, 1.0], s)
    y = Gamma @ v0 - noise_sd * rng.standard_normal(N)
    return RecoveryProblem(Gamma, y, v0, s, lam=lam)


# ---------------------------------------------------------------------------
# LASSO

def test_lasso_unregularized_orthonormal_recovers_exactly():
    n, N = 6, 12
    q, _ = np.linalg.qr(RNG.standard_normal((N, n)))
    v0 = np.zeros(n)
    v0[[1, 4]] = [1.0, -1.0]
    prob = RecoveryProblem(q, q @ v0, v0, 2, lam=0.0)
    res = lasso(prob, tol=1e-12)
    np.testing.assert_allclose(res.v_hat, v0, atol=1e-10)
    assert res.converged


def test_lasso_one_dimensional_soft_threshold():
    # column scaled so (1/N) sum x_i^2 = 1  =>  v_hat = soft(a, lam/2)
    N, a, lam = 40, 0.9, 0.5
    col = np.ones(N)
    prob = RecoveryProblem(col[:, None], a * col, np.array([a]), 1, lam=lam)
    res = lasso(prob, tol=1e-14)
    assert res.v_hat[0] == pytest.approx(a - lam / 2.0, rel=1e-12)
    shrunk_away = RecoveryProblem(col[:, None], 0.2 * col, np.array([0.2]), 1, lam=0.5)
    assert lasso(shrunk_away, tol=1e-14).v_hat[0] == 0.0


def test_lasso_zero_data_zero_solution():
    prob = RecoveryProblem(RNG.standard_normal((8, 5)), np.zeros(8), np.zeros(5), 0, lam=0.3)
    res = lasso(prob, tol=1e-12)
    assert np.all(res.v_hat == 0.0)


def test_lasso_result_consistency_on_recompute():
    prob = _random_sparse_instance(10, 20, 3, RNG, noise_sd=0.2, lam=0.1)
    res = lasso(prob, tol=1e-10)
    resid = np.linalg.norm(prob.Gamma @ res.v_hat - prob.y)
    obj = lasso_objective(prob.Gamma, prob.y, res.v_hat, prob.lam)
    assert res.residual == pytest.approx(resid, rel=1e-10)
    assert res.objective == pytest.approx(obj, rel=1e-10)


def test_lasso_termination_objective_slack():
    # a further (much tighter) solve can improve by at most 10 * tol * n
    prob = _random_sparse_instance(12, 24, 3, RNG, noise_sd=0.3, lam=0.2)
    tol = 1e-6
    rough = lasso(prob, tol=tol)
    tight = lasso(prob, tol=1e-13)
    assert rough.objective - tight.objective <= 10.0 * tol * 12


def test_lasso_matches_kkt_enumeration():
    for trial in range(20):
        n, N = 6, 5
        prob = _random_sparse_instance(n, N, 2, RNG, noise_sd=0.4, lam=0.3)
        res = lasso(prob, tol=1e-12, max_sweeps=20000)
        obj_oracle, _ = lasso_kkt_enum(prob.Gamma, prob.y, prob.lam)
        assert res.objective == pytest.approx(obj_oracle, rel=1e-8, abs=1e-10)


def test_lasso_errors_lp_keys():
    prob = _random_sparse_instance(8, 16, 2, RNG, lam=0.05)
    res = lasso(prob)
    assert set(res.errors_lp) == {1.0, 1.5, 2.0}


# ---------------------------------------------------------------------------
# basis pursuit

def test_bp_identity_system():
    y = np.array([1.0, -2.0, 0.0, 3.0])
    prob = RecoveryProblem(np.eye(4), y, y, 4)
    res = basis_pursuit(prob, tol=1e-10)
    np.testing.assert_allclose(res.v_hat, y, atol=1e-9)


def test_bp_zero_rhs():
    prob = RecoveryProblem(RNG.standard_normal((3, 8)), np.zeros(3), np.zeros(8), 0)
    res = basis_pursuit(prob, tol=1e-10)
    assert np.all(res.v_hat == 0.0)
    assert res.converged


def test_bp_feasibility_at_termination():
    for _ in range(10):
        prob = _random_sparse_instance(16, 8, 2, RNG)
        res = basis_pursuit(prob, tol=1e-8)
        assert res.residual <= 1e-8 * max(1.0, np.linalg.norm(prob.y))


def test_bp_one_sparse_gaussian_recovery():
    n, N = 32, 16
    Gamma = RNG.standard_normal((N, n))
    v0 = np.zeros(n)
    v0[0] = 1.0
    prob = RecoveryProblem(Gamma, Gamma @ v0, v0, 1)
    res = basis_pursuit(prob, tol=1e-10)
    assert np.linalg.norm(res.v_hat - v0) < 1e-6


def test_bp_matches_support_enumeration():
    for trial in range(20):
        n, N = 10, 5
        prob = _random_sparse_instance(n, N, 2, RNG)
        res = basis_pursuit(prob, tol=1e-10)
        oracle = basis_pursuit_enum(prob.Gamma, prob.y)
        assert res.objective == pytest.approx(oracle, rel=1e-6, abs=1e-8)


def test_bp_rank_deficient_flagged():
    # duplicated rows with inconsistent rhs cannot be satisfied
    row = RNG.standard_normal(6)
    Gamma = np.vstack([row, row])
    y = np.array([1.0, 2.0])
    prob = RecoveryProblem(Gamma, y, np.zeros(6), 0)
    res = basis_pursuit(prob, tol=1e-10)
    assert not res.converged


# ---------------------------------------------------------------------------
# penalty scale and experiment grid

def test_lambda_arithmetic_identity():
    noise = NoiseSpec("constant", q0=3.0, lq_norm=1.0)
    n = 64
    N = int(round(math.log(math.e * n)))
    lam = rate_penalty(noise, N, n, 1.0)
    assert lam == pytest.approx(math.sqrt(math.log(math.e * n) / N))


def test_lambda_halves_with_4x_samples():
    noise = NoiseSpec("gaussian", q0=3.0, lq_norm=2.0)
    lam1 = rate_penalty(noise, 100, 32, 1.7)
    lam2 = rate_penalty(noise, 400, 32, 1.7)
    assert lam2 == pytest.approx(lam1 / 2.0, rel=1e-14)
    lam_dbl = rate_penalty(noise, 200, 32, 1.7)
    assert lam_dbl == pytest.approx(lam1 / math.sqrt(2.0), rel=1e-14)


def test_recovery_problem_invariant():
    with pytest.raises(ValueError):
        RecoveryProblem(np.eye(3), np.zeros(3), np.array([1.0, 1.0, 0.0]), 1)


def test_make_recovery_problem_construction():
    dist = DistributionSpec("gaussian", 12)
    noise = NoiseSpec("symmetric_pareto", q0=3.0)
    prob = make_recovery_problem(dist, 8, 3, (71,), noise=noise, lam=0.1)
    assert np.count_nonzero(prob.v0) == 3
    assert set(np.unique(prob.v0[prob.v0 != 0])) <= {-1.0, 1.0}
    # y = Gamma v0 - xi holds by construction; reconstruct xi and check its law
    xi = prob.Gamma @ prob.v0 - prob.y
    assert xi.shape == (8,)
    clean = make_recovery_problem(dist, 8, 3, (71,))
    assert np.allclose(clean.y, clean.Gamma @ clean.v0)


def test_recovery_experiment_zero_sparsity_always_succeeds():
    rows = recovery_experiment(
        {"n": [16], "s": [0], "N": [8], "x_family": ["gaussian"],
         "trials": 5, "noise_family": "none"},
        seed_path=(31,),
    )
    assert len(rows) == 1
    assert rows[0]["success_rate"] == 1.0


def test_error_shape_in_sparsity():
    # medians over s in {2, 4, 8}: l1 error linear in s, l2 error like
    # sqrt(s), each within a factor 1.3 across the fourfold s range
    from emplab.distributions import canonical_heavy_tail_spec
    from emplab.recovery import DEFAULT_LASSO_C1

    n, N, trials = 256, 1024, 21
    dist = canonical_heavy_tail_spec(n)
    noise = NoiseSpec("symmetric_pareto", q0=3.0)
    lam = rate_penalty(noise, N, n, DEFAULT_LASSO_C1)
    med = {}
    for s in (2, 4, 8):
        e1, e2 = [], []
        for t in range(trials):
            prob = make_recovery_problem(dist, N, s, (557, s, t), noise=noise, lam=lam)
            res = lasso(prob, tol=1e-8)
            e1.append(res.errors_lp[1.0])
            e2.append(res.errors_lp[2.0])
        med[s] = (np.median(e1), np.median(e2))
    r1 = med[8][0] / med[2][0]
    r2 = med[8][1] / med[2][1]
    assert 4.0 / 1.3 <= r1 <= 4.0 * 1.3   # s^(1/1) over a factor 4 in s
    assert 2.0 / 1.3 <= r2 <= 2.0 * 1.3   # s^(1/2)


def test_calibrated_c1_in_bracket():
    # the error-minimizing penalty constant sits inside [0.1, 10]
    from emplab.distributions import canonical_heavy_tail_spec
    from emplab.recovery import calibrate_lasso_c1

    n = 64
    dist = canonical_heavy_tail_spec(n)
    noise = NoiseSpec("symmetric_pareto", q0=3.0)
    c1 = calibrate_lasso_c1(dist, noise, N=256, s=4, trials=8, seed_path=(558,))
    assert 0.1 <= c1 <= 10.0


def test_recovery_success_threshold():
    v0 = np.zeros(4)
    from emplab.recovery import RecoveryResult

    res = RecoveryResult(v_hat=np.full(4, 1e-8), iterations=1, residual=0.0, objective=0.0)
    assert recovery_success(res, v0)
    res_bad = RecoveryResult(v_hat=np.full(4, 1e-3), iterations=1, residual=0.0, objective=0.0)
    assert not recovery_success(res_bad, v0)
