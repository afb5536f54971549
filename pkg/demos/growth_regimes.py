"""How the expected number of tests grows when prevalence shrinks with N.

With p = a / N the mean grows like (3a/2) log2 N. With p = a / N**2 almost
every batch is clean and the mean tends to 1. With p = a / sqrt(N) only an
upper bound is available, and it is loose.
"""

from bsgt import RegimeSpec, convergence_table
from bsgt.asymptotics import bound_onset

for beta in (1.0, 2.0):
    spec = RegimeSpec(1.0, beta)
    print(f"a=1, beta={beta}")
    print("   n   exact mean   predicted   ratio   exact var   predicted   ratio")
    for r in convergence_table(spec, range(5, 41, 5)):
        v = r.variance
        print(f"  {r.n:2d}  {r.mean.exact_value:11.6f}  {r.mean.predicted:10.6f}  {r.mean.ratio:6.4f}"
              f"  {v.exact_value:10.4g}  {v.predicted:10.4g}  {v.ratio:6.4f}")
    print()

spec = RegimeSpec(1.0, 0.5)
print("a=1, beta=0.5: bound holds from n =", bound_onset(spec))
for r in convergence_table(spec, range(10, 41, 10)):
    print(f"  n={r.n}: mean {r.mean.exact_value:.4g}, bound {r.mean.predicted:.4g}")
