"""Adding a clean item to a batch can make it cheaper to resolve.

Seven items with only index 3 contaminated split 3|4, the right half is
inferred positive and split 2|2: six tests. Append a clean item and the
split becomes 4|4; the contaminated item now sits deeper on a left branch
and two inferences save a test: five tests. The distribution of the count
still grows with N; only the pointwise comparison fails.
"""

from bsgt import check_monotone_extension, execute_scheme, mean_exact
from bsgt.scheme import count_tests

v = [False, False, False, True, False, False, False]
print("7 items:", execute_scheme(v).test_count, "tests")
print("8 items:", execute_scheme(v + [False]).test_count, "tests")
print("monotone under extension:", check_monotone_extension(v, False))

print("\npatterns where appending an item lowers the count:")
for N in range(1, 12):
    bad = sum(count_tests(m, N) > count_tests(m | x << N, N + 1) for m in range(1 << N) for x in (0, 1))
    print(f"  N={N:2d}: {bad}")

print("\nmean still increases with N (q=0.9):", [round(mean_exact(N, 0.9), 3) for N in range(4, 11)])
