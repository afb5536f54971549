"""Simulation checked against the exact answer.

Results depend only on the seed, never on the worker count.
"""

import math

from bsgt import SimConfig, histogram_T_over_logN, mean_exact, simulate

cfg = SimConfig(N=1000, q=0.998, reps=100_000, seed=1)
est = simulate(cfg)
exact = mean_exact(1000, p=0.002)
print(f"N=1000, p=0.002, {cfg.reps} replicates ({cfg.resolved_sampler()} sampler)")
print(f"  simulated mean {est.mean:.4f} +/- {est.std_error:.4f}, exact {exact:.4f}, z = {est.z_score(exact):+.2f}")

again = simulate(SimConfig(N=1000, q=0.998, reps=100_000, seed=1, workers=4))
print("  same result with 4 workers:", again == est)

h = histogram_T_over_logN(1.0, 2**16, 100_000, seed=2, bins=12)
print(f"\nT / ln N at N=2^16, p=1/N: mean {h.sample_mean:.4f} (reference {1.5 / math.log(2):.4f})")
peak = h.counts.max()
for lo, c in zip(h.edges[:-1], h.counts):
    print(f"  {lo:6.2f}  " + "#" * int(50 * c / peak))
