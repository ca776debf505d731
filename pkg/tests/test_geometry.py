import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emplab.geometry import (
    IndexSetSpec,
    d2,
    gauge,
    gaussian_mean_width,
    gaussian_order_stat_means,
    l1_ball,
    l1_cap_l2,
    l2_ball,
    localized_support,
    permutation_polytope,
    sparse_cap,
    support,
    support_batch,
    unconditionality_check,
)

from _oracles import (
    direct_gaussian_l2_norm,
    support_l1_cap_l2_pga,
    support_l1_vertices,
    support_permutation_polytope_enum,
    support_sparse_cap_enum,
)

RNG = np.random.default_rng(7031)


def all_specs(n):
    return [
        l1_ball(n, 1.0),
        l2_ball(n, 1.3),
        sparse_cap(n, max(1, n // 3)),
        l1_cap_l2(n, 1.0, 0.6),
        permutation_polytope(RNG.standard_normal(n)),
    ]


# ---------------------------------------------------------------------------
# closed forms vs oracles

def test_l1_ball_vertex_examples():
    spec = l1_ball(4, 1.0)
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    assert support(spec, e1) == 1.0
    z = RNG.standard_normal(4)
    assert support(spec, z) == pytest.approx(support_l1_vertices(z, 1.0))


def test_sparse_cap_345():
    spec = sparse_cap(6, 2)
    z = np.array([3.0, 4.0, 0.0, 0.0, 0.0, 0.0])
    assert support(spec, z) == 5.0


def test_sparse_cap_enumeration():
    for _ in range(50):
        z = RNG.standard_normal(7)
        s = int(RNG.integers(1, 7))
        assert support(sparse_cap(7, s), z) == pytest.approx(
            support_sparse_cap_enum(z, s), rel=1e-12
        )


def test_permutation_polytope_enumeration():
    for _ in range(30):
        n = int(RNG.integers(2, 7))
        w = RNG.standard_normal(n)
        z = RNG.standard_normal(n)
        assert support(permutation_polytope(w), z) == pytest.approx(
            support_permutation_polytope_enum(z, w), rel=1e-12
        )


def test_permutation_polytope_zero_generator():
    spec = permutation_polytope(np.zeros(5))
    assert support(spec, RNG.standard_normal(5)) == 0.0


def test_l1_cap_l2_l2_constraint_binds_alone():
    z = RNG.standard_normal(8)
    r = 0.9 * np.linalg.norm(z) / np.abs(z).sum()  # r <= ||z||_2 * rho/||z||_1
    spec = l1_cap_l2(8, 1.0, r)
    assert support(spec, z) == pytest.approx(r * np.linalg.norm(z), rel=1e-12)


def test_l1_cap_l2_spec_example_vs_pga():
    z = np.array([1.0, 0.8, 0.1])
    spec = l1_cap_l2(3, 1.0, 0.5)
    oracle = support_l1_cap_l2_pga(z[:, None], 1.0, 0.5)[0]
    assert support(spec, z) == pytest.approx(oracle, rel=1e-6)


def test_l1_cap_l2_pga_sandwich():
    # PGA iterates are feasible (lower bounds); the scan evaluates upper
    # bounds; agreement pins the support value from both sides
    Z = RNG.standard_normal((6, 200))
    rho, r = 1.0, 0.45
    lower = support_l1_cap_l2_pga(Z, rho, r)
    scan = support_batch(l1_cap_l2(6, rho, r), Z.T)
    assert np.all(scan >= lower - 1e-11)
    np.testing.assert_allclose(scan, lower, rtol=1e-8)


# ---------------------------------------------------------------------------
# algebraic properties

@pytest.mark.parametrize("n", [3, 8])
def test_homogeneity_power_of_two_exact(n):
    for spec in all_specs(n):
        z = RNG.standard_normal(n)
        h = support(spec, z)
        assert support(spec, 2.0 * z) == 2.0 * h
        assert support(spec, -4.0 * z) == 4.0 * h


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3))
def test_homogeneity_general(c):
    z = np.random.default_rng(3).standard_normal(5)
    for spec in all_specs(5):
        assert support(spec, c * z) == pytest.approx(c * support(spec, z), rel=1e-11)


@pytest.mark.parametrize("n", [4, 10])
def test_unconditionality_all_families(n):
    for spec in all_specs(n):
        report = unconditionality_check(spec, trials=200, seed_path=(17,))
        assert report.passed, (spec.label(), report)


def test_localized_upper_bounds_and_monotonicity():
    n = 9
    radii = [0.2, 0.5, 1.0, 2.0]
    for spec in all_specs(n):
        for _ in range(20):
            z = RNG.standard_normal(n)
            h_full = support(spec, z)
            values = [localized_support(spec, z, r) for r in radii]
            for r, hv in zip(radii, values):
                assert hv <= min(h_full, r * np.linalg.norm(z)) + 1e-9
            for a, b in zip(values, values[1:]):
                assert a <= b + 1e-9  # nondecreasing in r
            ratios = [hv / r for r, hv in zip(radii, values)]
            for a, b in zip(ratios, ratios[1:]):
                assert b <= a + 1e-9  # phi(r) nonincreasing


def test_localized_l1_equality_when_l2_binds():
    z = RNG.standard_normal(7)
    spec = l1_ball(7, 1.0)
    r = 0.9 * np.linalg.norm(z) / np.abs(z).sum()
    assert localized_support(spec, z, r) == pytest.approx(r * np.linalg.norm(z), rel=1e-12)


def test_localized_permutation_polytope_cross_forms():
    # w = e1 makes the polytope an l1 ball: must match the breakpoint scan
    n = 8
    w = np.zeros(n)
    w[0] = 1.0
    pp = permutation_polytope(w)
    ball = l1_ball(n, 1.0)
    for _ in range(40):
        z = RNG.standard_normal(n) * math.exp(RNG.uniform(-1, 1))
        r = RNG.uniform(0.05, 2.0)
        assert localized_support(pp, z, r) == pytest.approx(
            localized_support(ball, z, r), rel=1e-9
        )


def test_localized_permutation_polytope_cube_oracle():
    # w = ones makes the polytope the cube: infimal convolution of the l1
    # norm and the scaled l2 norm has a scalar clip characterization
    n = 5
    cube = permutation_polytope(np.ones(n))

    def oracle(z, r):
        a = np.abs(z)

        def val(kappa):
            return np.maximum(a - kappa, 0.0).sum() + r * np.linalg.norm(np.minimum(a, kappa))

        lo, hi = 0.0, a.max()
        invphi = (math.sqrt(5) - 1) / 2
        x1, x2 = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
        f1, f2 = val(x1), val(x2)
        for _ in range(200):
            if f1 <= f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - invphi * (hi - lo)
                f1 = val(x1)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + invphi * (hi - lo)
                f2 = val(x2)
        return min(val(0.0), f1, f2, a.sum())

    for _ in range(40):
        z = RNG.standard_normal(n) * math.exp(RNG.uniform(-1, 1))
        r = RNG.uniform(0.05, 3.0)
        assert localized_support(cube, z, r) == pytest.approx(oracle(z, r), rel=1e-9)


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        support(l1_ball(4), np.zeros(5))


# ---------------------------------------------------------------------------
# d2 and gauge

def test_d2_values():
    assert d2(l1_ball(6, 2.0)) == 2.0
    assert d2(l2_ball(6, 0.7)) == 0.7
    assert d2(sparse_cap(6, 3)) == 1.0
    assert d2(l1_cap_l2(6, 2.0, 0.5)) == 0.5
    w = np.array([3.0, -4.0, 0.0])
    assert d2(permutation_polytope(w)) == 5.0
    assert d2(l1_ball(6, 2.0), localized_radius=0.3) == 0.3


def test_gauge_membership_scaling():
    n = 6
    for spec in all_specs(n):
        for _ in range(20):
            v = RNG.standard_normal(n)
            if spec.family == "sparse_cap":
                dense = v.copy()
                assert gauge(spec, dense) == math.inf or np.count_nonzero(dense) <= spec.s
                v = np.zeros(n)
                v[: spec.s] = RNG.standard_normal(spec.s)
            gv = gauge(spec, v)
            assert math.isfinite(gv) and gv > 0
            assert gauge(spec, v / gv) == pytest.approx(1.0, abs=1e-9)


def test_gauge_known_values():
    assert gauge(l1_ball(3, 2.0), np.array([1.0, -1.0, 0.0])) == 1.0
    assert gauge(l2_ball(3, 2.0), np.array([0.0, 2.0, 0.0])) == 1.0
    w = np.array([2.0, 1.0])
    # prefix sums of w* are (2, 3); v = (2, 1) sits on the boundary
    assert gauge(permutation_polytope(w), np.array([1.0, 2.0])) == 1.0
    assert gauge(permutation_polytope(w), np.array([4.0, 2.0])) == 2.0


def test_gauge_consistency_with_support():
    # duality spot check: <v, z> <= gauge(v) * support(z) for all pairs
    n = 7
    for spec in all_specs(n):
        for _ in range(30):
            z = RNG.standard_normal(n)
            v = RNG.standard_normal(n)
            if spec.family == "sparse_cap":
                v = np.zeros(n)
                v[: spec.s] = RNG.standard_normal(spec.s)
            gv = gauge(spec, v)
            if math.isfinite(gv):
                assert abs(v @ z) <= gv * support(spec, z) + 1e-9


# ---------------------------------------------------------------------------
# widths and order statistics

def test_width_l1_n1_gaussian_abs_mean():
    est = gaussian_mean_width(l1_ball(1, 1.0), draws=100_000, seed_path=(21,))
    target = math.sqrt(2.0 / math.pi)
    assert abs(est.mean - target) <= 3.0 * est.std_error


def test_width_l2_ball_vs_direct_norm_simulation():
    n = 100
    est = gaussian_mean_width(l2_ball(n, 1.0), draws=50_000, seed_path=(22,))
    oracle_mean, oracle_se = direct_gaussian_l2_norm(n, 50_000, seed=9)
    assert abs(est.mean - oracle_mean) <= 3.0 * math.hypot(est.std_error, oracle_se)


def test_width_degenerate_polytope_zero():
    est = gaussian_mean_width(permutation_polytope(np.zeros(6)), draws=100, seed_path=(23,))
    assert est.mean == 0.0
    assert est.d2 == 0.0


def test_width_estimate_fields():
    est = gaussian_mean_width(l1_ball(16), draws=5000, localized_radius=0.5, seed_path=(24,))
    assert est.draws == 5000
    assert est.localized_radius == 0.5
    assert est.d2 == 0.5
    assert est.complexity_ratio == pytest.approx((est.mean / 0.5) ** 2)
    assert est.std_error > 0


def test_width_determinism_and_chunk_invariance():
    a = gaussian_mean_width(l1_ball(600), draws=9000, seed_path=(25,))
    b = gaussian_mean_width(l1_ball(600), draws=9000, seed_path=(25,))
    assert a.mean == b.mean and a.std_error == b.std_error


def test_order_stat_means_basics():
    one = gaussian_order_stat_means(1, 200_000, seed_path=(26,))
    assert one[0] == pytest.approx(math.sqrt(2.0 / math.pi), abs=0.005)
    means = gaussian_order_stat_means(64, 20_000, seed_path=(27,))
    assert np.all(np.diff(means) <= 0)


def test_order_stat_top_bracket_n1024():
    means = gaussian_order_stat_means(1024, 3000, seed_path=(28,))
    target = math.sqrt(2.0 * math.log(1024))
    assert target - 1.0 <= means[0] <= target + 1.0


# ---------------------------------------------------------------------------
# spec validation

def test_spec_validation():
    with pytest.raises(ValueError):
        IndexSetSpec("l1_ball", 4, rho=0.0)
    with pytest.raises(ValueError):
        IndexSetSpec("sparse_cap", 4, s=0)
    with pytest.raises(ValueError):
        IndexSetSpec("permutation_polytope", 4, w=(1.0, 2.0))
    with pytest.raises(ValueError):
        IndexSetSpec("mystery", 4)
