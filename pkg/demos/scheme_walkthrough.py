"""Walk through the splitting procedure on one small batch.

Eight samples, one of them (index 5) contaminated. The lazy rule skips the
test on a right half whenever its left sibling came back clean.
"""

from bsgt import Variant, execute_scheme

batch = [False] * 8
batch[5] = True

for variant in Variant:
    result = execute_scheme(batch, variant)
    print(f"{variant.value}: {result.test_count} tests")
    for entry in result.trace:
        print(f"  items [{entry.start}, {entry.stop})  {entry.kind.name}")
    print(f"  contaminated: {sorted(result.contaminated())}")
    print()

# A clean batch costs one test, a fully contaminated one 2N - 1.
print("all clean:", execute_scheme([False] * 8).test_count)
print("all contaminated:", execute_scheme([True] * 8).test_count)
