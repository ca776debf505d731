"""Multiplier-process statistics and their realization-level diagnostics.

For a batch (X_i, xi_i, eps_i)_{i<=N} and an index set V, the key objects
are the coordinate sums

    Z_j = N^{-1/2} sum_i eps_i xi_i X_i[j],

whose support value over V equals the symmetrized process supremum
exactly, the centred supremum sup_v |N^{-1/2} sum_i (xi_i <X_i,v> -
E xi <X,v>)|, the rearranged-noise event

    A_u = { xi*_i <= u ||xi||_{L_q0} (eN/i)^{1/q0}  for all i },

and the smallest constant making a sqrt(log(en/j)) envelope hold for the
non-increasing rearrangement of |Z|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import NoiseSpec, SampleBatch
from .geometry import IndexSetSpec, WidthEstimate, support

DEFAULT_U_GRID = (2.0, 4.0, 8.0)


@dataclass(frozen=True)
class ProcessStats:
    """Per-trial multiplier-process statistics."""

    sup_centred: float
    sup_symmetrized: float
    Z: np.ndarray
    Z_sorted: np.ndarray
    A_u_holds: dict
    envelope_constant: float


class EnvelopeResult(NamedTuple):
    C_hat: float
    profile: np.ndarray


def check_A_u(xi: np.ndarray, q0: float, lq_norm: float, u: float) -> bool:
    """True iff the rearranged |xi| stays below u*lq_norm*(eN/i)^(1/q0)."""
    if u < 2.0:
        raise ValueError("u must be >= 2")
    if q0 <= 2.0:
        raise ValueError("q0 must be > 2")
    if not (lq_norm > 0.0):
        raise ValueError("a positive L_{q0} norm for the noise is required")
    xs = np.sort(np.abs(np.asarray(xi, dtype=np.float64)))[::-1]
    N = xs.size
    i = np.arange(1, N + 1, dtype=np.float64)
    bound = u * lq_norm * (math.e * N / i) ** (1.0 / q0)
    return bool(np.all(xs <= bound))


def order_stat_envelope(Z_sorted: np.ndarray, n: int | None = None) -> EnvelopeResult:
    """Smallest C with Z*_j <= C * sqrt(log(en/j)) for this realization."""
    Zs = np.asarray(Z_sorted, dtype=np.float64)
    if n is None:
        n = Zs.size
    if Zs.size != n:
        raise ValueError("Z_sorted length must equal n")
    if np.any(np.diff(Zs) > 1e-12 * max(1.0, float(np.abs(Zs).max(initial=0.0)))):
        raise ValueError("Z_sorted must be non-increasing")
    j = np.arange(1, n + 1, dtype=np.float64)
    denom = np.sqrt(np.log(math.e * n / j))
    profile = Zs / denom
    return EnvelopeResult(C_hat=float(profile.max()), profile=profile)


def multiplier_stats(
    batch: SampleBatch,
    spec: IndexSetSpec,
    noise: NoiseSpec,
    u_grid=DEFAULT_U_GRID,
    holdout: SampleBatch | None = None,
) -> ProcessStats:
    """Compute the per-trial process statistics for one batch.

    The centring term E xi <X,v> is zero exactly whenever xi*X is
    symmetric, which holds for every generated pair (all coordinate laws
    are symmetric); passing a ``holdout`` batch switches to the plug-in
    estimate mean(xi'_i X'_i) instead, at the cost of its own sampling
    noise.
    """
    N, n = batch.X.shape
    if spec.dim != n:
        raise ValueError(f"index set dim {spec.dim} != batch dim {n}")
    sqrt_n_obs = math.sqrt(N)

    Z = batch.X.T @ (batch.eps * batch.xi) / sqrt_n_obs
    sup_symmetrized = support(spec, Z)

    if holdout is not None:
        mean_term = (holdout.X * holdout.xi[:, None]).mean(axis=0)
    else:
        mean_term = np.zeros(n)
    z_centred = batch.X.T @ batch.xi / sqrt_n_obs - sqrt_n_obs * mean_term
    sup_centred = support(spec, z_centred)

    a_u = {float(u): check_A_u(batch.xi, noise.q0, noise.lq_norm, float(u)) for u in u_grid}
    Z_sorted = np.sort(np.abs(Z))[::-1]
    envelope = order_stat_envelope(Z_sorted, n)

    return ProcessStats(
        sup_centred=float(sup_centred),
        sup_symmetrized=float(sup_symmetrized),
        Z=Z,
        Z_sorted=Z_sorted,
        A_u_holds=a_u,
        envelope_constant=envelope.C_hat,
    )


def ratio_statistic(stats: ProcessStats, width: WidthEstimate, noise: NoiseSpec) -> float:
    """sup_centred normalized by ||xi||_{L_q0} * width; the bounded quantity."""
    if not (width.mean > 0.0):
        raise ValueError("degenerate index set: estimated width is zero")
    if not (noise.lq_norm > 0.0):
        raise ValueError("noise lq_norm must be positive")
    return stats.sup_centred / (noise.lq_norm * width.mean)
