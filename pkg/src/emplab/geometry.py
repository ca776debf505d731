"""Coordinate-symmetric index sets, exact support functions, and widths.

Five built-in families, each closed under coordinate permutations and sign
flips (so the associated sup-norm is 1-unconditional):

- ``l1_ball``: rho * B_1^n
- ``l2_ball``: r * B_2^n
- ``sparse_cap``: {v : ||v||_0 <= s, ||v||_2 <= 1}
- ``l1_cap_l2``: rho * B_1^n  intersected with  r * B_2^n
- ``permutation_polytope``: convex hull of all signed permutations of w

Support values sup_{v in V} |<v, z>| are evaluated exactly (closed forms;
the l1/l2 intersection by a breakpoint scan over sorted |z| with
closed-form interior minimization).  Monte-Carlo gaussian mean widths and
gaussian order-statistic means carry standard errors; every Monte-Carlo
reduction is a numpy pairwise-summation mean, reproducible for a fixed
seed path to the last bit and order-independent to ~1e-12 relative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import isotonic_regression

from .streams import SeedPath, rng_from_path

FAMILIES = ("l1_ball", "l2_ball", "sparse_cap", "l1_cap_l2", "permutation_polytope")

# Convergence tolerance of the 1-D scan used for the localized
# permutation-polytope support (the one family without a closed form).
_LOCALIZED_SCAN_TOL = 1e-12


@dataclass(frozen=True)
class IndexSetSpec:
    """One of the built-in index-set families on R^dim.

    ``rho`` is the l1 radius (l1_ball, l1_cap_l2), ``r`` the l2 radius
    (l2_ball, l1_cap_l2), ``s`` the sparsity (sparse_cap) and ``w`` the
    generating vector (permutation_polytope).  Use the factory helpers
    rather than filling unused fields.
    """

    family: str
    dim: int
    rho: float = 1.0
    r: float = 1.0
    s: int = 1
    w: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown index-set family {self.family!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.family in ("l1_ball", "l1_cap_l2") and self.rho <= 0:
            raise ValueError("l1 radius rho must be > 0")
        if self.family in ("l2_ball", "l1_cap_l2") and self.r <= 0:
            raise ValueError("l2 radius r must be > 0")
        if self.family == "sparse_cap" and not (1 <= self.s):
            raise ValueError("sparsity s must be >= 1")
        if self.family == "permutation_polytope":
            if self.w is None or len(self.w) != self.dim:
                raise ValueError("permutation_polytope needs w with len(w) == dim")
            object.__setattr__(self, "w", tuple(float(v) for v in self.w))

    def to_dict(self) -> dict:
        d = {"family": self.family, "dim": self.dim}
        if self.family in ("l1_ball", "l1_cap_l2"):
            d["rho"] = self.rho
        if self.family in ("l2_ball", "l1_cap_l2"):
            d["r"] = self.r
        if self.family == "sparse_cap":
            d["s"] = self.s
        if self.family == "permutation_polytope":
            d["w"] = list(self.w)
        return d

    def label(self) -> str:
        if self.family == "l1_ball":
            return f"l1_ball(rho={self.rho:g})"
        if self.family == "l2_ball":
            return f"l2_ball(r={self.r:g})"
        if self.family == "sparse_cap":
            return f"sparse_cap(s={self.s})"
        if self.family == "l1_cap_l2":
            return f"l1_cap_l2(rho={self.rho:g},r={self.r:g})"
        return f"permutation_polytope(n={self.dim})"


def l1_ball(dim: int, rho: float = 1.0) -> IndexSetSpec:
    return IndexSetSpec("l1_ball", dim, rho=rho)


def l2_ball(dim: int, r: float = 1.0) -> IndexSetSpec:
    return IndexSetSpec("l2_ball", dim, r=r)


def sparse_cap(dim: int, s: int) -> IndexSetSpec:
    return IndexSetSpec("sparse_cap", dim, s=s)


def l1_cap_l2(dim: int, rho: float = 1.0, r: float = 1.0) -> IndexSetSpec:
    return IndexSetSpec("l1_cap_l2", dim, rho=rho, r=r)


def permutation_polytope(w) -> IndexSetSpec:
    w = tuple(float(v) for v in w)
    return IndexSetSpec("permutation_polytope", len(w), w=w)


def index_set_from_dict(d: dict) -> IndexSetSpec:
    kwargs = dict(d)
    family = kwargs.pop("family")
    dim = int(kwargs.pop("dim"))
    if "w" in kwargs and kwargs["w"] is not None:
        kwargs["w"] = tuple(kwargs["w"])
    return IndexSetSpec(family, dim, **kwargs)


def d2(spec: IndexSetSpec, localized_radius: float | None = None) -> float:
    """Euclidean radius sup_{v in V} ||v||_2 (of V cap rB_2 when localized)."""
    if spec.family == "l1_ball":
        base = spec.rho
    elif spec.family == "l2_ball":
        base = spec.r
    elif spec.family == "sparse_cap":
        base = 1.0
    elif spec.family == "l1_cap_l2":
        base = min(spec.rho, spec.r)
    else:
        base = float(np.linalg.norm(spec.w))
    if localized_radius is not None:
        base = min(base, float(localized_radius))
    return base


def _as_batch(z: np.ndarray, dim: int) -> tuple[np.ndarray, bool]:
    Z = np.asarray(z, dtype=np.float64)
    single = Z.ndim == 1
    if single:
        Z = Z[None, :]
    if Z.ndim != 2 or Z.shape[1] != dim:
        raise ValueError(f"expected vectors of length {dim}, got shape {np.shape(z)}")
    return Z, single


def _top_s_norms(Z: np.ndarray, s: int) -> np.ndarray:
    n = Z.shape[1]
    A2 = Z * Z
    if s >= n:
        return np.sqrt(A2.sum(axis=1))
    part = np.partition(A2, n - s, axis=1)[:, n - s:]
    return np.sqrt(part.sum(axis=1))


def _sorted_abs_desc(Z: np.ndarray) -> np.ndarray:
    return np.sort(np.abs(Z), axis=1)[:, ::-1]


def _l1_cap_l2_support_sorted(A: np.ndarray, rho: float, r: float) -> np.ndarray:
    """Exact sup над rho*B1 cap r*B2 from rows sorted as |z| descending.

    Evaluates the one-dimensional dual  min_{mu>=0} rho*mu + r*||soft(z,mu)||_2
    at every breakpoint mu = a_k, at mu = 0, and at the closed-form interior
    stationary point of each segment.  Every evaluated mu yields an upper
    bound on the true value, and the candidate set provably contains the
    minimizer, so the minimum over candidates is exact.
    """
    B, n = A.shape
    ks = np.arange(1, n + 1, dtype=np.float64)
    S1 = np.cumsum(A, axis=1)
    S2 = np.cumsum(A * A, axis=1)
    Vk = np.maximum(S2 - S1 * S1 / ks, 0.0)

    # mu = 0 (pure l2 bound)
    best = r * np.sqrt(S2[:, -1])

    # breakpoints mu = a_k: active set {j <= k}, tied terms contribute zero
    f_bp = np.maximum(S2 - 2.0 * A * S1 + ks * A * A, 0.0)
    g_bp = rho * A + r * np.sqrt(f_bp)
    best = np.minimum(best, g_bp.min(axis=1))

    # interior stationary point of each segment, where defined
    denom = r * r - (rho * rho) / ks
    with np.errstate(divide="ignore", invalid="ignore"):
        t = rho * np.sqrt(np.where(denom > 0, Vk / denom, np.nan))
        mu = (S1 - t) / ks
    lo = np.concatenate([A[:, 1:], np.zeros((B, 1))], axis=1)
    valid = (denom > 0) & np.isfinite(mu) & (mu >= np.maximum(lo, 0.0)) & (mu <= A)
    g_int = np.where(valid, rho * mu + r * np.sqrt(Vk + np.where(valid, t * t, 0.0) / ks), np.inf)
    best = np.minimum(best, g_int.min(axis=1))
    return best


def support_batch(spec: IndexSetSpec, Z: np.ndarray) -> np.ndarray:
    """sup_{v in V} |<v, z>| for each row z of Z.  Exact."""
    Z, _ = _as_batch(Z, spec.dim)
    if spec.family == "l1_ball":
        return spec.rho * np.abs(Z).max(axis=1)
    if spec.family == "l2_ball":
        return spec.r * np.linalg.norm(Z, axis=1)
    if spec.family == "sparse_cap":
        return _top_s_norms(Z, spec.s)
    if spec.family == "l1_cap_l2":
        return _l1_cap_l2_support_sorted(_sorted_abs_desc(Z), spec.rho, spec.r)
    w_star = np.sort(np.abs(np.asarray(spec.w)))[::-1]
    return _sorted_abs_desc(Z) @ w_star


def support(spec: IndexSetSpec, z: np.ndarray) -> float:
    """sup_{v in V} |<v, z>|; exact closed form per family."""
    return float(support_batch(spec, np.asarray(z, dtype=np.float64)[None, :])[0])


# ---------------------------------------------------------------------------
# localized supports: V cap (radius * B_2^n)

def _prox_owl(z: np.ndarray, lam_w: np.ndarray) -> np.ndarray:
    """prox of the ordered-weighted-l1 penalty sum_j lam_w[j] * |x|_(j).

    Sorted soft-shrink followed by an isotonic (nonincreasing) projection
    and clipping at zero; exact for nonincreasing nonnegative weights.
    """
    sign = np.sign(z)
    a = np.abs(z)
    order = np.argsort(-a, kind="stable")
    shrunk = a[order] - lam_w
    iso = isotonic_regression(shrunk, increasing=False).x
    x_sorted = np.maximum(iso, 0.0)
    out = np.empty_like(a)
    out[order] = x_sorted
    return sign * out


def _owl_value(x: np.ndarray, w_star: np.ndarray) -> float:
    return float(np.sort(np.abs(x))[::-1] @ w_star)


def _permpoly_localized_support_one(z: np.ndarray, w_star: np.ndarray, radius: float) -> float:
    """sup over (perm polytope of w) cap radius*B2 of <v, z>.

    Computed as the infimal convolution  min_u OWL_w(u) + radius*||z - u||_2
    via a golden-section scan over the scalar t in

        F(t) = min_u OWL_w(u) + (radius/2) (||z - u||^2 / t + t),

    which is convex in t; the inner minimum is the exact OWL prox.  Every
    evaluation is an upper bound on the true support, so the scan minimum
    (together with the endpoint candidates u = z and u = 0) converges to
    the exact value from above.
    """
    znorm = float(np.linalg.norm(z))
    if znorm == 0.0:
        return 0.0
    best = min(_owl_value(z, w_star), radius * znorm)  # u = z and u = 0

    def f_of_t(t: float) -> float:
        u = _prox_owl(z, (t / radius) * w_star)
        return _owl_value(u, w_star) + (radius / (2.0 * t)) * float(
            np.sum((z - u) ** 2)
        ) + 0.5 * radius * t

    lo, hi = 1e-9 * znorm, znorm
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f_of_t(x1), f_of_t(x2)
    while hi - lo > _LOCALIZED_SCAN_TOL * znorm:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f_of_t(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f_of_t(x2)
    return min(best, f1, f2)


def localized_support_batch(
    spec: IndexSetSpec, Z: np.ndarray, radius: float | None
) -> np.ndarray:
    """sup over V cap radius*B2 of |<v, z>| for each row z."""
    if radius is None:
        return support_batch(spec, Z)
    if radius <= 0:
        raise ValueError("localized radius must be > 0")
    Z, _ = _as_batch(Z, spec.dim)
    fam = spec.family
    if fam == "l2_ball":
        return min(spec.r, radius) * np.linalg.norm(Z, axis=1)
    if fam == "sparse_cap":
        return min(1.0, radius) * _top_s_norms(Z, spec.s)
    if fam == "l1_ball":
        return _l1_cap_l2_support_sorted(_sorted_abs_desc(Z), spec.rho, radius)
    if fam == "l1_cap_l2":
        return _l1_cap_l2_support_sorted(
            _sorted_abs_desc(Z), spec.rho, min(spec.r, radius)
        )
    # permutation polytope: no closed form for the intersection
    if radius >= d2(spec):
        return support_batch(spec, Z)
    w_star = np.sort(np.abs(np.asarray(spec.w)))[::-1]
    return np.array(
        [_permpoly_localized_support_one(z, w_star, radius) for z in Z]
    )


def localized_support(spec: IndexSetSpec, z: np.ndarray, radius: float | None) -> float:
    return float(localized_support_batch(spec, np.asarray(z, dtype=np.float64)[None, :], radius)[0])


def gauge(spec: IndexSetSpec, v: np.ndarray) -> float:
    """Minkowski functional inf{t > 0 : v in t*V}; inf is +inf if none."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (spec.dim,):
        raise ValueError(f"expected a vector of length {spec.dim}")
    if spec.family == "l1_ball":
        return float(np.abs(v).sum() / spec.rho)
    if spec.family == "l2_ball":
        return float(np.linalg.norm(v) / spec.r)
    if spec.family == "sparse_cap":
        nnz = int(np.count_nonzero(v))
        return float(np.linalg.norm(v)) if nnz <= spec.s else math.inf
    if spec.family == "l1_cap_l2":
        return float(max(np.abs(v).sum() / spec.rho, np.linalg.norm(v) / spec.r))
    # permutation polytope: v in t*V  iff  prefix sums of v* are dominated
    # by t * prefix sums of w*
    v_star = np.sort(np.abs(v))[::-1]
    w_star = np.sort(np.abs(np.asarray(spec.w)))[::-1]
    pv = np.cumsum(v_star)
    pw = np.cumsum(w_star)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(pv > 0, pv / pw, 0.0)
    if np.any((pv > 0) & (pw == 0)):
        return math.inf
    return float(ratios.max())


# ---------------------------------------------------------------------------
# Monte-Carlo widths and order statistics

@dataclass(frozen=True)
class WidthEstimate:
    """Monte-Carlo estimate of a mean width, with its sampling error.

    ``d2`` is the Euclidean radius of the (possibly localized) set and
    ``complexity_ratio`` the squared ratio (mean / d2)^2.
    """

    mean: float
    std_error: float
    draws: int
    localized_radius: float | None
    d2: float
    complexity_ratio: float


def _make_width_estimate(values: np.ndarray, spec, localized_radius) -> WidthEstimate:
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else math.inf
    rad = d2(spec, localized_radius)
    ratio = (mean / rad) ** 2 if rad > 0 else math.nan
    return WidthEstimate(
        mean=mean,
        std_error=se,
        draws=len(values),
        localized_radius=localized_radius,
        d2=rad,
        complexity_ratio=ratio,
    )


def gaussian_mean_width(
    spec: IndexSetSpec,
    draws: int,
    localized_radius: float | None = None,
    seed_path: int | SeedPath = (0,),
) -> WidthEstimate:
    """Monte-Carlo E sup_{v in V cap rB2} |<G, v>| over standard gaussians."""
    if draws < 2:
        raise ValueError("draws must be >= 2")
    rng = rng_from_path(seed_path, "gaussian")
    values = np.empty(draws)
    done = 0
    chunk = max(1, 4_000_000 // spec.dim)
    while done < draws:
        take = min(chunk, draws - done)
        G = rng.standard_normal((take, spec.dim))
        values[done:done + take] = localized_support_batch(spec, G, localized_radius)
        done += take
    return _make_width_estimate(values, spec, localized_radius)


def gaussian_order_stat_means(
    n: int, n_draws: int, seed_path: int | SeedPath = (0,)
) -> np.ndarray:
    """Monte-Carlo E g_j*: expected nonincreasing rearrangement of |g_1..g_n|."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    rng = rng_from_path(seed_path, "gaussian")
    acc = np.zeros(n)
    done = 0
    chunk = max(1, 4_000_000 // n)
    while done < n_draws:
        take = min(chunk, n_draws - done)
        G = rng.standard_normal((take, n))
        acc += _sorted_abs_desc(G).sum(axis=0)
        done += take
    return acc / n_draws


# ---------------------------------------------------------------------------
# unconditionality diagnostics

UNCONDITIONALITY_TOL = 1e-10


@dataclass(frozen=True)
class UnconditionalityReport:
    """Max violations of the three symmetry clauses over random trials.

    Violations are relative to max(1, |h|).  Any figure above
    ``UNCONDITIONALITY_TOL`` signals an implementation bug in the support
    function, not bad data.
    """

    trials: int
    max_permutation_violation: float
    max_sign_violation: float
    max_majorization_violation: float

    @property
    def passed(self) -> bool:
        worst = max(
            self.max_permutation_violation,
            self.max_sign_violation,
            self.max_majorization_violation,
        )
        return worst <= UNCONDITIONALITY_TOL


def unconditionality_check(
    spec: IndexSetSpec, trials: int, seed_path: int | SeedPath = (0,)
) -> UnconditionalityReport:
    """Test invariance under permutations/sign flips and majorization monotonicity."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng_from_path(seed_path, "directions")
    n = spec.dim
    perm_err = 0.0
    sign_err = 0.0
    major_err = 0.0
    for _ in range(trials):
        z = rng.standard_normal(n) * math.exp(rng.uniform(-2.0, 2.0))
        h = support(spec, z)
        scale = max(1.0, abs(h))

        perm = rng.permutation(n)
        perm_err = max(perm_err, abs(support(spec, z[perm]) - h) / scale)

        signs = 2.0 * rng.integers(0, 2, size=n) - 1.0
        sign_err = max(sign_err, abs(support(spec, signs * z) - h) / scale)

        # x with sorted |x| dominated pointwise by sorted |z|
        mult = rng.uniform(0.0, 1.0, size=n)
        x = rng.permutation(np.abs(z)) * mult * (2.0 * rng.integers(0, 2, size=n) - 1.0)
        hx = support(spec, x)
        major_err = max(major_err, max(0.0, hx - h) / scale)
    return UnconditionalityReport(
        trials=trials,
        max_permutation_violation=perm_err,
        max_sign_violation=sign_err,
        max_majorization_violation=major_err,
    )
