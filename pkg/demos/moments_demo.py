"""Moment growth of the coordinate laws.

The quantity of interest is ||x||_{L_q} / sqrt(q): flat in q means
gaussian-like moment growth.  Light-tailed laws stay bounded for every q;
a Student t law with df = 2 ln(n) stays bounded only up to q ~ log n,
which is exactly the regime the multiplier experiments probe.
"""

import math

import numpy as np

from emplab.distributions import (
    DistributionSpec,
    canonical_heavy_tail_spec,
    empirical_p_norm,
    moment_growth_profile,
    small_ball_estimate,
)

SEED = (2026_08_10,)


def show_profile(label, spec, p=14, n_samples=400_000):
    prof = moment_growth_profile(spec, p=p, n_samples=n_samples, seed_path=SEED)
    ratios = " ".join(f"{r:5.2f}" for _, r in prof)
    print(f"{label:<28} q=1..{prof[-1][0]}: {ratios}")


def main():
    print(__doc__)
    show_profile("gaussian", DistributionSpec("gaussian", 1))
    show_profile("rademacher", DistributionSpec("rademacher", 1))
    show_profile("weibull shape 1", DistributionSpec("symmetric_weibull", 1, tail_param=1.0))
    show_profile("pareto tail 4.5", DistributionSpec("symmetric_pareto", 1, tail_param=4.5))

    n = 1024
    spec = canonical_heavy_tail_spec(n)
    print(f"\nStudent t with df = 2 ln({n}) = {spec.tail_param:.2f} "
          f"(the 'log n usable moments' regime):")
    show_profile(f"student_t df={spec.tail_param:.1f}", spec)

    rng = np.random.default_rng(1)
    samples = rng.standard_t(spec.tail_param, 400_000) * spec.scale
    res = empirical_p_norm(samples, p=int(math.log(n)))
    print(f"\nsup_q<=log(n) ||x||_Lq/sqrt(q) = {res.value:.3f} "
          f"(attained at q={res.q_star}, cap {res.q_cap})")

    sb = small_ball_estimate(DistributionSpec("gaussian", 32), kappa=0.5,
                             n_dirs=64, n_samples=100_000, seed_path=SEED)
    print(f"\nsmall-ball proxy for a gaussian vector, kappa=0.5: "
          f"min direction frequency = {sb:.3f}")


if __name__ == "__main__":
    main()
