"""The binary search pooling scheme as a deterministic function of the sample.

A group whose status is unknown gets one pooled test. A group known to be
positive is split into its first ``m // 2`` items and the remaining
``m - m // 2``; only the left half is tested. If the left half is clean the
right half must hold the contamination, so it is treated as positive without
a test. If the left half is positive, nothing is known about the right half
and it goes back to the unknown state.

``Variant.NAIVE_BOTH_HALVES`` drops that inference and always tests the right
half. It exists for comparison only: the closed-form moments in
:mod:`bsgt.exact` describe ``Variant.PAPER_LAZY``.

Item indices are 0-based and groups are half-open ``[start, stop)`` ranges.
"""

from __future__ import annotations

import enum
import functools
import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Variant",
    "EntryKind",
    "TraceEntry",
    "SchemeResult",
    "Pmf",
    "execute_scheme",
    "count_tests",
    "enumerate_distribution",
    "check_monotone_extension",
    "MAX_ENUMERATION_N",
]

MAX_ENUMERATION_N = 20


class Variant(enum.Enum):
    PAPER_LAZY = "lazy"
    NAIVE_BOTH_HALVES = "naive"


class EntryKind(enum.Enum):
    TEST_POSITIVE = "test+"
    TEST_NEGATIVE = "test-"
    INFERRED_POSITIVE = "inferred+"

    @property
    def is_physical(self) -> bool:
        return self is not EntryKind.INFERRED_POSITIVE


@dataclass(frozen=True)
class TraceEntry:
    start: int
    stop: int
    kind: EntryKind

    @property
    def size(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class SchemeResult:
    test_count: int
    trace: tuple[TraceEntry, ...]

    def contaminated(self) -> frozenset[int]:
        """Indices the trace identifies as contaminated."""
        out = set()
        for e in self.trace:
            if e.size == 1 and e.kind in (EntryKind.TEST_POSITIVE, EntryKind.INFERRED_POSITIVE):
                out.add(e.start)
        return frozenset(out)

    def clean(self) -> frozenset[int]:
        """Indices covered by a negative pooled test."""
        out = set()
        for e in self.trace:
            if e.kind is EntryKind.TEST_NEGATIVE:
                out.update(range(e.start, e.stop))
        return frozenset(out)


@dataclass(frozen=True)
class Pmf:
    """Distribution of the test count, as ``{t: P(T = t)}`` over t >= 1."""

    N: int
    probabilities: dict[int, float]

    @classmethod
    def from_array(cls, N: int, weights: np.ndarray) -> "Pmf":
        # weights[t] = P(T = t); index 0 is always empty
        return cls(N, {int(t): float(w) for t, w in enumerate(weights) if t >= 1 and w != 0.0})

    def to_array(self) -> np.ndarray:
        out = np.zeros(2 * self.N)
        for t, w in self.probabilities.items():
            out[t] = w
        return out

    def total(self) -> float:
        return float(sum(self.probabilities[t] for t in sorted(self.probabilities)))

    def mean(self) -> float:
        return float(sum(t * self.probabilities[t] for t in sorted(self.probabilities)))

    def second_moment(self) -> float:
        return float(sum(t * t * self.probabilities[t] for t in sorted(self.probabilities)))

    def variance(self) -> float:
        m = self.mean()
        return float(sum((t - m) ** 2 * self.probabilities[t] for t in sorted(self.probabilities)))

    def cdf(self) -> np.ndarray:
        """``cdf[t] = P(T <= t)`` for t = 0 .. 2N - 1."""
        return np.cumsum(self.to_array())


def _as_items(v: Sequence[bool]) -> tuple[bool, ...]:
    items = tuple(bool(x) for x in v)
    if not items:
        raise ValueError("contamination vector must be nonempty")
    return items


def execute_scheme(v: Sequence[bool], variant: Variant = Variant.PAPER_LAZY) -> SchemeResult:
    """Run the scheme on a contamination pattern (True = contaminated).

    Returns the number of physical tests and the ordered trace of every test
    and inference, in the order a lab would perform them.
    """
    items = _as_items(v)
    # prefix[i] = number of contaminated items among the first i
    prefix = [0, *itertools.accumulate(items)]
    trace: list[TraceEntry] = []

    def has_positive(start: int, stop: int) -> bool:
        return prefix[stop] > prefix[start]

    def test(start: int, stop: int) -> bool:
        hit = has_positive(start, stop)
        trace.append(TraceEntry(start, stop, EntryKind.TEST_POSITIVE if hit else EntryKind.TEST_NEGATIVE))
        return hit

    def unknown(start: int, stop: int) -> None:
        if test(start, stop):
            positive(start, stop)

    def positive(start: int, stop: int) -> None:
        if stop - start == 1:
            return
        mid = start + (stop - start) // 2
        if test(start, mid):
            positive(start, mid)
            unknown(mid, stop)
        elif variant is Variant.PAPER_LAZY:
            trace.append(TraceEntry(mid, stop, EntryKind.INFERRED_POSITIVE))
            positive(mid, stop)
        else:
            unknown(mid, stop)

    unknown(0, len(items))
    count = sum(1 for e in trace if e.kind.is_physical)
    return SchemeResult(count, tuple(trace))


def count_tests(mask: int, N: int, variant: Variant = Variant.PAPER_LAZY) -> int:
    """Test count for the pattern whose bit ``i`` marks item ``i`` contaminated.

    Same decision rules as :func:`execute_scheme` without building a trace;
    used by the enumeration oracle.
    """
    lazy = variant is Variant.PAPER_LAZY

    def hit(start: int, stop: int) -> bool:
        return (mask >> start) & ((1 << (stop - start)) - 1) != 0

    def unknown(start: int, stop: int) -> int:
        return 1 + positive(start, stop) if hit(start, stop) else 1

    def positive(start: int, stop: int) -> int:
        if stop - start == 1:
            return 0
        mid = start + (stop - start) // 2
        if hit(start, mid):
            return 1 + positive(start, mid) + unknown(mid, stop)
        if lazy:
            return 1 + positive(mid, stop)
        return 1 + unknown(mid, stop)

    return unknown(0, N)


@functools.lru_cache(maxsize=64)
def _count_table(N: int, variant: Variant) -> tuple[tuple[int, ...], ...]:
    """``table[t][k]`` = number of patterns with k contaminated items and T = t."""
    table = [[0] * (N + 1) for _ in range(2 * N)]
    for mask in range(1 << N):
        table[count_tests(mask, N, variant)][mask.bit_count()] += 1
    return tuple(tuple(row) for row in table)


def enumerate_distribution(N: int, q: float, variant: Variant = Variant.PAPER_LAZY) -> Pmf:
    """Exact law of the test count by running the scheme on all 2**N patterns.

    Each pattern with k contaminated items has weight ``p**k * q**(N - k)``.
    Patterns are tallied by (test count, k) as integers first, so the result
    does not depend on enumeration order.
    """
    if not 1 <= N <= MAX_ENUMERATION_N:
        raise OverflowError(f"enumeration supports 1 <= N <= {MAX_ENUMERATION_N}, got {N}")
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    p = 1.0 - q
    weights = np.zeros(2 * N)
    for t, row in enumerate(_count_table(N, variant)):
        weights[t] = sum(c * p**k * q ** (N - k) for k, c in enumerate(row) if c)
    return Pmf.from_array(N, weights)


def check_monotone_extension(v: Sequence[bool], extra: bool) -> bool:
    """True iff appending ``extra`` to ``v`` does not lower the test count."""
    items = _as_items(v)
    return execute_scheme(items).test_count <= execute_scheme(items + (bool(extra),)).test_count
