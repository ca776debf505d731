"""Random kernel sections and localized-width fixed points.

For an index set V and a threshold gamma*sqrt(m), the gaussian fixed point
r_G is the smallest radius r with  l*(V cap rB2) <= gamma * r * sqrt(m);
r_X replaces the gaussian width by the empirical-process width of an
arbitrary isotropic ensemble.  Both are found by bisection on the
nonincreasing map  phi(r) = width(r)/r, with Monte-Carlo confidence bands.

``kernel_section_diameter`` draws an m x n measurement matrix, computes an
orthonormal kernel basis by a rank-revealing factorization, and certifies
a lower bound on diam(ker cap V) by rescaling probe directions to the
boundary of V through the exact gauge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .distributions import DistributionSpec, sample_coordinates
from .geometry import IndexSetSpec, WidthEstimate, d2, gauge, localized_support_batch
from .geometry import _make_width_estimate
from .streams import SeedPath, as_seed_path, child_path, rng_from_path


@dataclass(frozen=True)
class FixedPointResult:
    """Bisection output: bracket, width estimate at r_star, confidence."""

    r_star: float
    gamma: float
    m: int
    bracket: tuple[float, float]
    width_at_r: WidthEstimate
    confident: bool
    bracketed: bool


def empirical_process_width(
    dist: DistributionSpec,
    spec: IndexSetSpec,
    m: int,
    draws: int,
    localized_radius: float | None = None,
    seed_path: int | SeedPath = (0,),
) -> WidthEstimate:
    """Monte-Carlo E sup_{v in V cap rB2} |<m^{-1/2} sum_i X_i, v>|.

    The inner normalized sum is a single vector per draw, so each support
    value is exact.
    """
    if draws < 2:
        raise ValueError("draws must be >= 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = rng_from_path(seed_path, "X")
    values = np.empty(draws)
    done = 0
    chunk = max(1, 4_000_000 // (m * spec.dim))
    inv_sqrt_m = 1.0 / math.sqrt(m)
    while done < draws:
        take = min(chunk, draws - done)
        X = sample_coordinates(dist, (take, m, spec.dim), rng)
        sums = X.sum(axis=1) * inv_sqrt_m
        values[done:done + take] = localized_support_batch(spec, sums, localized_radius)
        done += take
    return _make_width_estimate(values, spec, localized_radius)


def _fixed_point(width_fn, spec, gamma, m, tol, seed_path) -> FixedPointResult:
    """Bisection on r for the predicate width(r) <= gamma * r * sqrt(m)."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    if m < 1:
        raise ValueError("m must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    threshold = gamma * math.sqrt(m)
    path = as_seed_path(seed_path)

    r_hi = d2(spec)
    est_hi = width_fn(r_hi, child_path(path, 0))
    if est_hi.mean > threshold * r_hi:
        # not bracketable: even the full set fails the width condition
        return FixedPointResult(
            r_star=r_hi,
            gamma=gamma,
            m=m,
            bracket=(r_hi, r_hi),
            width_at_r=est_hi,
            confident=False,
            bracketed=False,
        )

    r_lo = 0.0
    est_lo = None
    k = 1
    while r_hi - r_lo > tol:
        mid = 0.5 * (r_lo + r_hi)
        est = width_fn(mid, child_path(path, k))
        k += 1
        if est.mean <= threshold * mid:
            r_hi, est_hi = mid, est
        else:
            r_lo, est_lo = mid, est

    confident = est_hi.mean + 3.0 * est_hi.std_error <= threshold * r_hi
    if est_lo is not None:
        confident = confident and (est_lo.mean - 3.0 * est_lo.std_error >= threshold * r_lo)
    return FixedPointResult(
        r_star=r_hi,
        gamma=gamma,
        m=m,
        bracket=(r_lo, r_hi),
        width_at_r=est_hi,
        confident=bool(confident),
        bracketed=True,
    )


def r_G_fixed_point(
    spec: IndexSetSpec,
    gamma: float,
    m: int,
    tol: float,
    draws: int,
    seed_path: int | SeedPath = (0,),
) -> FixedPointResult:
    """Smallest r (within tol) with gaussian width of V cap rB2 <= gamma r sqrt(m)."""
    from .geometry import gaussian_mean_width

    def width_fn(r, path):
        return gaussian_mean_width(spec, draws, localized_radius=r, seed_path=path)

    return _fixed_point(width_fn, spec, gamma, m, tol, seed_path)


def r_X_fixed_point(
    dist: DistributionSpec,
    spec: IndexSetSpec,
    gamma: float,
    m: int,
    tol: float,
    draws: int,
    seed_path: int | SeedPath = (0,),
) -> FixedPointResult:
    """Same fixed point with the empirical-process width of the X ensemble."""
    if dist.dim != spec.dim:
        raise ValueError("distribution and index set dimension mismatch")

    def width_fn(r, path):
        return empirical_process_width(
            dist, spec, m, draws, localized_radius=r, seed_path=path
        )

    return _fixed_point(width_fn, spec, gamma, m, tol, seed_path)


# ---------------------------------------------------------------------------
# kernel sections

@dataclass(frozen=True)
class KernelDiameterResult:
    """Certified lower bound on diam(ker(Gamma) cap V)."""

    lower_bound: float
    kernel_dim: int
    rank_deficient: bool
    m: int
    gamma_seed_path: SeedPath


def _extreme_direction(spec: IndexSetSpec) -> np.ndarray:
    """A direction along which V attains its Euclidean radius."""
    n = spec.dim
    if spec.family == "permutation_polytope":
        return np.array(spec.w, dtype=np.float64)
    e1 = np.zeros(n)
    e1[0] = 1.0
    return e1


def kernel_section_diameter(
    dist: DistributionSpec,
    spec: IndexSetSpec,
    m: int,
    probes: int = 1000,
    seed_path: int | SeedPath = (0,),
) -> KernelDiameterResult:
    """Lower-bound diam(ker(Gamma) cap V) over probe directions.

    Probes: random gaussian kernel vectors, kernel projections of every
    1-sparse vector and of sampled 2-sparse sign vectors (the classical
    extremizers for the l1 ball), and the kernel projection of a
    d2-attaining direction.  Each probe is rescaled to the boundary of V
    with the exact gauge; the bound is 2 * max ||probe|| after rescaling.
    """
    n = spec.dim
    if dist.dim != n:
        raise ValueError("distribution and index set dimension mismatch")
    if m >= n:
        raise ValueError("m must be < dim so the kernel is nontrivial")
    if probes < 1:
        raise ValueError("probes must be >= 1")
    path = as_seed_path(seed_path)

    if m == 0:
        K = np.eye(n)
        rank = 0
    else:
        Gamma = sample_coordinates(dist, (m, n), rng_from_path(path, "X"))
        K = null_space(Gamma)
        rank = n - K.shape[1]
    kernel_dim = K.shape[1]
    rank_deficient = m > 0 and rank < m

    rng = rng_from_path(path, "probe")
    cands = []
    if kernel_dim > 0:
        # random directions inside the kernel
        g = rng.standard_normal((kernel_dim, probes))
        cands.append(K @ g)
        # kernel projections of sparse sign vectors and the extreme direction
        proj = K @ K.T
        cands.append(proj)  # columns are projections of e_j
        pairs = rng.integers(0, n, size=(probes, 2))
        signs = 2.0 * rng.integers(0, 2, size=probes) - 1.0
        two_sparse = np.zeros((n, probes))
        two_sparse[pairs[:, 0], np.arange(probes)] += 1.0
        two_sparse[pairs[:, 1], np.arange(probes)] += signs
        cands.append(proj @ two_sparse)
        cands.append((proj @ _extreme_direction(spec))[:, None])
    directions = np.concatenate(cands, axis=1) if cands else np.zeros((n, 0))

    best = 0.0
    for d in directions.T:
        nrm = float(np.linalg.norm(d))
        if nrm <= 1e-14:
            continue
        gv = gauge(spec, d)
        if not math.isfinite(gv) or gv <= 0:
            continue
        best = max(best, nrm / gv)
    return KernelDiameterResult(
        lower_bound=2.0 * best,
        kernel_dim=kernel_dim,
        rank_deficient=rank_deficient,
        m=m,
        gamma_seed_path=path,
    )


def calibrate_kernel_constant(
    dist: DistributionSpec,
    spec: IndexSetSpec,
    m: int,
    calibration_draws: int,
    seed_path: int | SeedPath,
    probes: int = 1000,
    width_draws: int = 2000,
    tol_factor: float = 1e-3,
    margin: float = 1.05,
) -> float:
    """Fit the width-condition constant from one calibration run.

    Finds (by bisection over gamma) the largest gamma whose fixed-point
    radius satisfies 2*r_G >= margin * max of the calibration kernel
    diameters; freezing the returned value leaves fresh draws above
    2*r_G(V, gamma) only in the tail beyond the margin.
    """
    path = as_seed_path(seed_path)
    lbs = [
        kernel_section_diameter(dist, spec, m, probes, child_path(path, i)).lower_bound
        for i in range(calibration_draws)
    ]
    target = margin * float(np.max(lbs))
    tol = tol_factor * d2(spec)

    def two_r_g(gamma: float) -> float:
        res = r_G_fixed_point(spec, gamma, m, tol, width_draws, child_path(path, 10_000))
        return 2.0 * res.r_star

    g_lo, g_hi = 1e-3, 64.0
    if two_r_g(g_lo) < target:
        return g_lo
    while two_r_g(g_hi) >= target and g_hi < 1e6:
        g_hi *= 2.0
    for _ in range(40):
        mid = math.sqrt(g_lo * g_hi)
        if two_r_g(mid) >= target:
            g_lo = mid
        else:
            g_hi = mid
    return g_lo
