import math

import numpy as np
import pytest
from scipy import stats as sps

from emplab.distributions import DistributionSpec, NoiseSpec, SampleBatch, sample_batch
from emplab.geometry import gaussian_mean_width, l1_ball, permutation_polytope, support
from emplab.process import (
    check_A_u,
    multiplier_stats,
    order_stat_envelope,
    ratio_statistic,
)

from _oracles import support_permutation_polytope_enum

CONST_NOISE = NoiseSpec("constant", q0=3.0, lq_norm=1.0)


def _manual_batch(X, xi, eps):
    return SampleBatch(
        X=np.asarray(X, float),
        xi=np.asarray(xi, float),
        eps=np.asarray(eps, float),
        seed_path=(0,),
    )


# ---------------------------------------------------------------------------
# the symmetrized supremum and the Z reduction

def test_sup_symmetrized_unwinds_for_l1():
    rng = np.random.default_rng(41)
    N, n = 32, 8
    X = 2.0 * rng.integers(0, 2, size=(N, n)) - 1.0
    eps = 2.0 * rng.integers(0, 2, size=N) - 1.0
    batch = _manual_batch(X, np.ones(N), eps)
    st = multiplier_stats(batch, l1_ball(n), CONST_NOISE)
    manual = max(abs(eps @ X[:, j]) / math.sqrt(N) for j in range(n))
    assert st.sup_symmetrized == pytest.approx(manual, rel=1e-14)


def test_single_observation_example():
    n = 4
    X = np.zeros((1, n))
    X[0, 0] = 1.0
    batch = _manual_batch(X, [2.0], [-1.0])
    st = multiplier_stats(batch, l1_ball(n), NoiseSpec("constant", q0=3.0, lq_norm=2.0))
    assert st.sup_symmetrized == 2.0


def test_reduction_exactness_against_vertex_enumeration():
    rng = np.random.default_rng(55)
    N, n = 20, 5
    X = rng.standard_normal((N, n))
    xi = rng.standard_normal(N)
    eps = 2.0 * rng.integers(0, 2, size=N) - 1.0
    batch = _manual_batch(X, xi, eps)
    w = rng.standard_normal(n)
    spec = permutation_polytope(w)
    st = multiplier_stats(batch, spec, NoiseSpec("gaussian", q0=3.0))
    Z = X.T @ (eps * xi) / math.sqrt(N)
    assert np.allclose(st.Z, Z)
    brute = support_permutation_polytope_enum(Z, np.asarray(w))
    assert st.sup_symmetrized == pytest.approx(brute, rel=1e-12)
    assert st.sup_symmetrized == pytest.approx(support(spec, Z), rel=1e-12)


def test_z_sorted_is_sorted_rearrangement():
    batch = sample_batch(DistributionSpec("gaussian", 16), CONST_NOISE, 32, (9,))
    st = multiplier_stats(batch, l1_ball(16), CONST_NOISE)
    assert np.all(np.diff(st.Z_sorted) <= 0)
    assert sorted(np.abs(st.Z)) == sorted(st.Z_sorted)


def test_scale_equivariance_power_of_two():
    batch = sample_batch(DistributionSpec("gaussian", 8), NoiseSpec("gaussian", q0=3.0), 16, (10,))
    spec = l1_ball(8)
    noise = NoiseSpec("gaussian", q0=3.0)
    st1 = multiplier_stats(batch, spec, noise)
    scaled = _manual_batch(batch.X, 4.0 * batch.xi, batch.eps)
    noise4 = NoiseSpec("gaussian", q0=3.0, lq_norm=4.0)
    st2 = multiplier_stats(scaled, spec, noise4)
    assert st2.sup_symmetrized == 4.0 * st1.sup_symmetrized
    assert np.array_equal(st2.Z, 4.0 * st1.Z)
    width = gaussian_mean_width(spec, draws=2000, seed_path=(11,))
    assert ratio_statistic(st2, width, noise4) == pytest.approx(
        ratio_statistic(st1, width, noise), rel=1e-14
    )


def test_holdout_plugin_centring():
    rng = np.random.default_rng(77)
    N, n = 64, 6
    batch = _manual_batch(rng.standard_normal((N, n)), rng.standard_normal(N),
                          2.0 * rng.integers(0, 2, size=N) - 1.0)
    hold = _manual_batch(rng.standard_normal((N, n)), rng.standard_normal(N),
                         2.0 * rng.integers(0, 2, size=N) - 1.0)
    spec = l1_ball(n)
    st = multiplier_stats(batch, spec, NoiseSpec("gaussian", q0=3.0), holdout=hold)
    m_hat = (hold.X * hold.xi[:, None]).mean(axis=0)
    z_c = batch.X.T @ batch.xi / math.sqrt(N) - math.sqrt(N) * m_hat
    assert st.sup_centred == pytest.approx(support(spec, z_c), rel=1e-14)


def test_dimension_mismatch():
    batch = sample_batch(DistributionSpec("gaussian", 8), CONST_NOISE, 4, (1,))
    with pytest.raises(ValueError):
        multiplier_stats(batch, l1_ball(9), CONST_NOISE)


def test_symmetrization_domination_in_means():
    # mean centred sup <= 2 * mean symmetrized sup + 3 combined stderr
    dist = DistributionSpec("gaussian", 32)
    noise = NoiseSpec("gaussian", q0=3.0)
    spec = l1_ball(32)
    cent, symm = [], []
    for t in range(200):
        st = multiplier_stats(sample_batch(dist, noise, 64, (812, t)), spec, noise)
        cent.append(st.sup_centred)
        symm.append(st.sup_symmetrized)
    cent, symm = np.array(cent), np.array(symm)
    se = math.hypot(cent.std(ddof=1), 2.0 * symm.std(ddof=1)) / math.sqrt(len(cent))
    assert cent.mean() <= 2.0 * symm.mean() + 3.0 * se


def test_mean_sup_matches_width_at_matched_scale():
    # xi == 1 and gaussian X make Z exactly standard gaussian, so the mean
    # symmetrized supremum over B1 must agree with the width estimate
    n, N, trials = 256, 256, 200
    dist = DistributionSpec("gaussian", n)
    spec = l1_ball(n)
    sups = np.array([
        multiplier_stats(sample_batch(dist, CONST_NOISE, N, (611, t)), spec, CONST_NOISE
                         ).sup_symmetrized
        for t in range(trials)
    ])
    width = gaussian_mean_width(spec, draws=20_000, seed_path=(612,))
    se = math.hypot(sups.std(ddof=1) / math.sqrt(trials), width.std_error)
    assert abs(sups.mean() - width.mean) <= 3.0 * se


def test_gaussian_equivalence_two_sample_ks():
    # with xi == 1 and gaussian X, Z is exactly standard gaussian
    n, N, m = 32, 16, 800
    dist = DistributionSpec("gaussian", n)
    spec = l1_ball(n)
    sup_z = np.empty(m)
    for t in range(m):
        st = multiplier_stats(sample_batch(dist, CONST_NOISE, N, (501, t)), spec, CONST_NOISE)
        sup_z[t] = st.sup_symmetrized
    rng = np.random.default_rng(502)
    sup_g = np.abs(rng.standard_normal((m, n))).max(axis=1)
    stat = sps.ks_2samp(sup_z, sup_g).statistic
    crit = 1.62762 * math.sqrt(2.0 / m)  # 1% level
    assert stat < crit


# ---------------------------------------------------------------------------
# the event A_u

def test_A_u_zero_noise_always_holds():
    assert check_A_u(np.zeros(50), q0=3.0, lq_norm=1.0, u=2.0)
    assert check_A_u(np.zeros(50), q0=3.0, lq_norm=1.0, u=8.0)


def test_A_u_single_large_value():
    # N=1: bound is 2 * e^(1/3) ~ 2.79 < 10
    assert not check_A_u(np.array([10.0]), q0=3.0, lq_norm=1.0, u=2.0)
    assert 2.0 * math.e ** (1.0 / 3.0) == pytest.approx(2.79, abs=0.01)


def test_A_u_uses_absolute_rearrangement():
    xi = np.array([-10.0, 0.1, 0.2])
    assert not check_A_u(xi, q0=3.0, lq_norm=1.0, u=2.0)


def test_A_u_parameter_validation():
    with pytest.raises(ValueError):
        check_A_u(np.ones(4), q0=3.0, lq_norm=1.0, u=1.5)
    with pytest.raises(ValueError):
        check_A_u(np.ones(4), q0=2.0, lq_norm=1.0, u=2.0)
    with pytest.raises(ValueError):
        check_A_u(np.ones(4), q0=3.0, lq_norm=0.0, u=2.0)


# ---------------------------------------------------------------------------
# order-statistic envelope

def test_envelope_of_reference_vector_is_one():
    n = 50
    j = np.arange(1, n + 1)
    z0 = np.sqrt(np.log(math.e * n / j))
    res = order_stat_envelope(z0, n)
    assert res.C_hat == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(res.profile, 1.0)


def test_envelope_zero_vector():
    assert order_stat_envelope(np.zeros(16), 16).C_hat == 0.0


def test_envelope_rejects_unsorted():
    with pytest.raises(ValueError):
        order_stat_envelope(np.array([1.0, 2.0, 0.5]), 3)


def test_envelope_gaussian_scale():
    # iid gaussian order statistics have an O(1) envelope constant
    rng = np.random.default_rng(61)
    n = 1024
    chats = []
    for _ in range(200):
        z = np.sort(np.abs(rng.standard_normal(n)))[::-1]
        chats.append(order_stat_envelope(z, n).C_hat)
    assert np.quantile(chats, 0.95) <= 3.0


# ---------------------------------------------------------------------------
# ratio statistic

def test_ratio_zero_sup():
    batch = _manual_batch(np.zeros((4, 3)), np.zeros(4), np.ones(4))
    st = multiplier_stats(batch, l1_ball(3), CONST_NOISE)
    width = gaussian_mean_width(l1_ball(3), draws=500, seed_path=(1,))
    assert ratio_statistic(st, width, CONST_NOISE) == 0.0


def test_ratio_arithmetic():
    from emplab.geometry import WidthEstimate
    from emplab.process import ProcessStats

    st = ProcessStats(2.0, 2.0, np.zeros(2), np.zeros(2), {}, 0.0)
    width = WidthEstimate(4.0, 0.1, 100, None, 1.0, 16.0)
    assert ratio_statistic(st, width, CONST_NOISE) == 0.5


def test_ratio_degenerate_width_rejected():
    from emplab.geometry import WidthEstimate
    from emplab.process import ProcessStats

    st = ProcessStats(2.0, 2.0, np.zeros(2), np.zeros(2), {}, 0.0)
    width = WidthEstimate(0.0, 0.0, 100, None, 0.0, math.nan)
    with pytest.raises(ValueError, match="degenerate"):
        ratio_statistic(st, width, CONST_NOISE)
