"""Exact mean, variance and full distribution of the test count.

The recursion is cheap even for astronomically large batches, and agrees
with brute-force enumeration wherever enumeration is feasible.
"""

from bsgt import enumerate_distribution, mean_exact, pmf_exact, variance_exact

N, q = 12, 0.9
brute = enumerate_distribution(N, q)
exact = variance_exact(N, q)
print(f"N={N}, q={q}")
print(f"  enumeration: mean {brute.mean():.12f}  variance {brute.variance():.12f}")
print(f"  recursion:   mean {exact.mean:.12f}  variance {exact.variance:.12f}")

pmf = pmf_exact(64, p=0.02)
print("\nP(T = t) for N=64, p=0.02 (t with probability > 1%):")
for t, w in sorted(pmf.probabilities.items()):
    if w > 0.01:
        print(f"  {t:3d}  {w:.4f}  " + "#" * int(200 * w))

# Tiny prevalence: pass p directly so 1 - p is not rounded away.
for N in (10**6, 10**12, 10**18):
    print(f"N={N:.0e}, p=3/N: mean {mean_exact(N, p=3 / N):.4f}")
