"""The multiplier process under heavy tails.

Coordinates with only ~log(n) gaussian-like moments and a noise multiplier
with barely more than 2 moments: the supremum of the multiplier process
over the l1 ball, normalized by ||xi||_{L_q0} * l*(V), stays bounded as n
grows, as if everything were subgaussian.  Per trial the script also shows
the realization-level diagnostics: whether the rearranged noise stayed
below its (eN/i)^(1/q0) envelope, and the smallest constant C with
Z*_j <= C sqrt(log(en/j)).
"""

import numpy as np

from emplab.distributions import NoiseSpec, canonical_heavy_tail_spec, sample_batch
from emplab.geometry import gaussian_mean_width, l1_ball
from emplab.process import multiplier_stats, ratio_statistic

SEED = 2026_08_10
TRIALS = 100


def main():
    print(__doc__)
    noise = NoiseSpec("symmetric_pareto", q0=3.0)
    print(f"noise: symmetric pareto, q0={noise.q0}, tail exponent {noise.tail_param}, "
          f"||xi||_L3 = {noise.lq_norm}")
    print(f"\n{'n':>6} {'mean ratio':>11} {'p95 C_hat':>10} {'A_2 rate':>9}")
    for n in (64, 256, 1024):
        dist = canonical_heavy_tail_spec(n)
        spec = l1_ball(n)
        width = gaussian_mean_width(spec, draws=20_000, seed_path=(SEED, n))
        ratios, chats, a2 = [], [], 0
        for t in range(TRIALS):
            batch = sample_batch(dist, noise, n, (SEED, n, t))
            st = multiplier_stats(batch, spec, noise)
            ratios.append(ratio_statistic(st, width, noise))
            chats.append(st.envelope_constant)
            a2 += int(st.A_u_holds[2.0])
        print(f"{n:>6} {np.mean(ratios):>11.4f} {np.quantile(chats, 0.95):>10.4f} "
              f"{a2 / TRIALS:>9.2f}")
    print("\nA bounded ratio column is the whole point: the heavy-tailed "
          "process costs only a constant over the gaussian width.")


if __name__ == "__main__":
    main()
