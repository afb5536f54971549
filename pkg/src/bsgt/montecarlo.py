"""Monte Carlo estimation of the test count with reproducible random streams.

The scheme's cost depends only on which nodes of the fixed halving tree hold
a contaminated item: every internal node that holds one costs a test of its
left child, and when that left child also holds one its right sibling is
tested too. So

    T = 1 + #(occupied internal nodes) + #(internal nodes with occupied left child)

for the lazy scheme, and ``1 + 2 * #(occupied internal nodes)`` for the naive
one. The vectorized kernel below walks every contaminated item down the tree
and counts distinct nodes per replicate, which costs O(K log N) per
replicate for K contaminated items instead of O(N).

Random streams come from numpy's counter-based Philox generator keyed by the
seed. Two samplers are provided:

``dense``
    one uniform per item, item k contaminated iff ``u_k < p``. Replicate r
    reads a fixed window of the stream starting at counter ``r * ceil(N/4)``,
    so draws are shared across prevalence values and across N (coupling).
``sparse``
    a Binomial(N, p) count per replicate plus a uniform subset of positions.
    Same law, far cheaper when p*N is small. Chunk c of ``CHUNK`` replicates
    uses its own Philox counter window.

Replicates are grouped into fixed chunks of ``CHUNK``; chunk statistics are
merged in a fixed pairwise tree, so results do not depend on ``workers``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._powers import check_probability
from .scheme import Variant

__all__ = [
    "CHUNK",
    "SimConfig",
    "SimEstimate",
    "Moments",
    "CouplingReport",
    "Histogram",
    "tests_from_positions",
    "tests_from_matrix",
    "dense_uniforms",
    "sample_test_counts",
    "simulate",
    "coupled_ordering_check",
    "histogram_T_over_logN",
]

CHUNK = 8192
MAX_N = 2**40
# replicate index * node-key space must fit in int64
_MAX_KEY = 2**62

# sparse chunks live far above any dense counter window
_SPARSE_COUNTER_BASE = 1 << 128


@dataclass(frozen=True)
class SimConfig:
    N: int
    q: float
    reps: int
    seed: int = 0
    workers: int = 1
    sampler: str = "auto"
    variant: Variant = Variant.PAPER_LAZY

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if self.N > MAX_N:
            raise OverflowError(f"N above {MAX_N} is not supported")
        check_probability(self.q, "q")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.sampler not in ("auto", "dense", "sparse"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.resolved_sampler() == "dense" and self.reps * self.N > 2**50:
            raise OverflowError("reps * N too large for the dense sampler")

    @property
    def p(self) -> float:
        return 1.0 - self.q

    def resolved_sampler(self) -> str:
        if self.sampler != "auto":
            return self.sampler
        return "sparse" if self.N >= 256 and self.p <= 0.05 else "dense"


@dataclass(frozen=True)
class Moments:
    """Count, mean and sum of squared deviations of a sample."""

    n: int
    mean: float
    m2: float

    @classmethod
    def of(cls, x: np.ndarray) -> "Moments":
        n = len(x)
        if n == 0:
            return cls(0, 0.0, 0.0)
        # integer samples: sums are exact in int64 / Python int
        s1 = int(np.sum(x, dtype=np.int64))
        s2 = int(np.sum(x.astype(np.int64) ** 2))
        mean = s1 / n
        m2 = (n * s2 - s1 * s1) / n
        return cls(n, mean, m2)

    def merge(self, other: "Moments") -> "Moments":
        if self.n == 0:
            return other
        if other.n == 0:
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return Moments(n, mean, m2)


def _tree_merge(parts: list[Moments]) -> Moments:
    while len(parts) > 1:
        nxt = [parts[i].merge(parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0] if parts else Moments(0, 0.0, 0.0)


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    variance: float
    std_error: float
    ci95: tuple[float, float]
    reps: int

    @classmethod
    def from_moments(cls, m: Moments) -> "SimEstimate":
        var = m.m2 / (m.n - 1) if m.n > 1 else 0.0
        se = math.sqrt(var / m.n)
        return cls(m.mean, var, se, (m.mean - 1.96 * se, m.mean + 1.96 * se), m.n)

    def z_score(self, exact_mean: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.mean == exact_mean else math.copysign(math.inf, self.mean - exact_mean)
        return (self.mean - exact_mean) / self.std_error


def tests_from_positions(
    rep: np.ndarray, pos: np.ndarray, n_reps: int, N: int, variant: Variant = Variant.PAPER_LAZY
) -> np.ndarray:
    """Test counts for ``n_reps`` replicates given their contaminated items.

    ``rep[i]`` is the replicate (0 .. n_reps-1) holding contaminated item
    ``pos[i]``. Duplicate (rep, pos) pairs are harmless.
    """
    # a node is identified by (depth, first item); depth < 64 for N < 2**63
    span = 64 * N
    if span * max(n_reps, 1) >= _MAX_KEY:
        raise OverflowError("too many replicates in one call for this N")
    rep = np.asarray(rep, dtype=np.int64)
    pos = np.asarray(pos, dtype=np.int64)
    lo = np.zeros_like(pos)
    hi = np.full_like(pos, N)
    occupied, left_occupied = [], []
    depth = 0
    while True:
        inner = hi - lo >= 2
        if not inner.any():
            break
        rep, pos, lo, hi = rep[inner], pos[inner], lo[inner], hi[inner]
        key = rep * span + depth * N + lo
        occupied.append(key)
        mid = lo + (hi - lo) // 2
        left = pos < mid
        left_occupied.append(key[left])
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        depth += 1

    counts = np.ones(n_reps, dtype=np.int64)
    if occupied:
        nodes = np.unique(np.concatenate(occupied))
        per_node = np.bincount(nodes // span, minlength=n_reps)
        if variant is Variant.PAPER_LAZY:
            lefts = np.unique(np.concatenate(left_occupied))
            counts += per_node + np.bincount(lefts // span, minlength=n_reps)
        else:
            counts += 2 * per_node
    return counts


def tests_from_matrix(xi: np.ndarray, variant: Variant = Variant.PAPER_LAZY) -> np.ndarray:
    """Test counts for each row of a boolean (replicates x N) pattern matrix."""
    xi = np.asarray(xi, dtype=bool)
    rep, pos = np.nonzero(xi)
    return tests_from_positions(rep, pos, xi.shape[0], xi.shape[1], variant)


def _blocks(N: int) -> int:
    # Philox yields four 64-bit words per counter step
    return -(-N // 4)


def dense_uniforms(seed: int, start: int, stop: int, N: int, stride: int | None = None) -> np.ndarray:
    """Uniforms for replicates ``start .. stop-1``, one row of N per replicate.

    Row r is a pure function of ``(seed, r)``: it is read from the Philox
    stream at counter ``r * stride`` (default ``ceil(N / 4)``). Passing the
    stride of a larger N gives rows whose first N entries coincide with the
    larger pattern's, which is what the extension coupling relies on.
    """
    stride = _blocks(N) if stride is None else stride
    if stride < _blocks(N):
        raise ValueError("stride too small for N")
    gen = np.random.Generator(np.random.Philox(key=seed, counter=start * stride))
    u = gen.random((stop - start, 4 * stride))
    return u[:, :N]


def _sparse_positions(seed: int, chunk: int, n_reps: int, N: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    gen = np.random.Generator(np.random.Philox(key=seed, counter=_SPARSE_COUNTER_BASE + (chunk << 64)))
    k = gen.binomial(N, p, size=n_reps)
    rep = np.repeat(np.arange(n_reps, dtype=np.int64), k)
    pos = gen.integers(0, N, size=len(rep), dtype=np.int64)
    # redraw collisions until every replicate holds distinct positions; the
    # procedure is symmetric in item labels, so the final set is a uniform
    # subset of the drawn size
    while len(rep):
        key = rep * N + pos
        order = np.argsort(key, kind="stable")
        dup = np.zeros(len(key), dtype=bool)
        dup[order[1:]] = key[order[1:]] == key[order[:-1]]
        if not dup.any():
            break
        pos[dup] = gen.integers(0, N, size=int(dup.sum()), dtype=np.int64)
    return rep, pos


def _chunk_counts(cfg: SimConfig, chunk: int) -> np.ndarray:
    start = chunk * CHUNK
    stop = min(cfg.reps, start + CHUNK)
    n_reps = stop - start
    if cfg.q == 1.0:
        return np.ones(n_reps, dtype=np.int64)
    if cfg.resolved_sampler() == "dense":
        xi = dense_uniforms(cfg.seed, start, stop, cfg.N) < cfg.p
        return tests_from_matrix(xi, cfg.variant)
    rep, pos = _sparse_positions(cfg.seed, chunk, n_reps, cfg.N, cfg.p)
    return tests_from_positions(rep, pos, n_reps, cfg.N, cfg.variant)


def _map_chunks(cfg: SimConfig, fn):
    n_chunks = -(-cfg.reps // CHUNK)
    if cfg.workers == 1 or n_chunks == 1:
        return [fn(c) for c in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, range(n_chunks)))


def sample_test_counts(cfg: SimConfig) -> np.ndarray:
    """All ``cfg.reps`` simulated test counts, in replicate order."""
    return np.concatenate(_map_chunks(cfg, lambda c: _chunk_counts(cfg, c)))


def simulate(cfg: SimConfig) -> SimEstimate:
    parts = _map_chunks(cfg, lambda c: Moments.of(_chunk_counts(cfg, c)))
    return SimEstimate.from_moments(_tree_merge(parts))


@dataclass(frozen=True)
class CouplingReport:
    N: int
    q1: float
    q2: float
    reps: int
    prevalence_violations: int
    extension_violations: int
    mean_q1: float
    mean_q2: float

    @property
    def violations(self) -> int:
        return self.prevalence_violations + self.extension_violations


def coupled_ordering_check(N: int, q1: float, q2: float, reps: int, seed: int = 0) -> CouplingReport:
    """Compare test counts replicate by replicate on shared uniforms.

    Each replicate draws one uniform per item (N + 1 items) and sets item k
    contaminated iff ``u_k < p``. Patterns are then pointwise monotone in p,
    so the count at the larger q must never exceed the count at the smaller
    one. On the same draws it also counts replicates where dropping the last
    item raises the count (at q2). That can happen for some N, e.g. N = 7, so
    it is reported separately rather than treated as a failure.
    """
    check_probability(q1, "q1")
    check_probability(q2, "q2")
    if not q1 > q2:
        raise ValueError("need q1 > q2")
    if N < 1:
        raise ValueError("N must be >= 1")
    prev_bad = ext_bad = 0
    sums = [0, 0]
    for start in range(0, reps, CHUNK):
        stop = min(reps, start + CHUNK)
        u = dense_uniforms(seed, start, stop, N + 1)
        t1 = tests_from_matrix(u[:, :N] < 1.0 - q1)
        t2 = tests_from_matrix(u[:, :N] < 1.0 - q2)
        t2_ext = tests_from_matrix(u < 1.0 - q2)
        prev_bad += int(np.count_nonzero(t1 > t2))
        ext_bad += int(np.count_nonzero(t2 > t2_ext))
        sums[0] += int(t1.sum())
        sums[1] += int(t2.sum())
    return CouplingReport(N, q1, q2, reps, prev_bad, ext_bad, sums[0] / reps, sums[1] / reps)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    N: int
    p: float
    reps: int
    sample_mean: float
    min_value: float = field(default=0.0)


def histogram_T_over_logN(a: float, N: int, reps: int, seed: int = 0, bins: int = 40, beta: float = 1.0,
                          workers: int = 1) -> Histogram:
    """Exploratory histogram of T(N) / ln N at prevalence p = a / N.

    No limit law is fitted or assumed; the only property enforced is that
    every sample is strictly positive.
    """
    if beta != 1.0:
        raise ValueError("the T/ln N histogram is defined for beta = 1 only")
    if a <= 0:
        raise ValueError("a must be > 0")
    if N < 2:
        raise ValueError("N must be >= 2 so that ln N > 0")
    p = min(1.0, a / N)
    cfg = SimConfig(N=N, q=1.0 - p, reps=reps, seed=seed, workers=workers)
    x = sample_test_counts(cfg) / math.log(N)
    if not np.all(x > 0):
        raise AssertionError("T / ln N must be strictly positive")
    counts, edges = np.histogram(x, bins=bins)
    return Histogram(edges, counts, N, p, reps, float(x.mean()), float(x.min()))
