"""Self-checks tying the scheme, the recursions and the closed forms together.

Each check returns a :class:`CheckResult`; :func:`run_all` runs the whole
battery. ``closed_form_variant`` exists as a negative control: binding the
closed forms to the naive scheme must make the mean cross-check fail.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .asymptotics import bernoulli_bounds
from .exact import (
    mean_closed_form_pow2,
    mean_closed_form_pow2_alt,
    mean_exact,
    pmf_exact,
    variance_closed_form_pow2,
    variance_exact,
)
from .scheme import Variant, count_tests, enumerate_distribution, execute_scheme

Q_GRID = tuple(round(0.1 * i, 1) for i in range(11))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _rel_close(a: float, b: float, rel: float, floor: float = 1e-12) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b), floor)


def check_scheme_exhaustive(max_n: int = 10) -> CheckResult:
    """Bounds 1 <= T <= 2N-1, exact identification, naive >= lazy."""
    bad = []
    for N in range(1, max_n + 1):
        for bits in itertools.product((False, True), repeat=N):
            lazy = execute_scheme(bits)
            naive = execute_scheme(bits, Variant.NAIVE_BOTH_HALVES)
            truth = {i for i, b in enumerate(bits) if b}
            ok = (
                1 <= lazy.test_count <= 2 * N - 1
                # for N = 1 the bounds coincide, so T = 1 says nothing
                and (N == 1 or (lazy.test_count == 1) == (not truth))
                and (len(truth) < N or lazy.test_count == 2 * N - 1)
                and lazy.contaminated() == truth == naive.contaminated()
                and lazy.clean() | truth == set(range(N))
                and naive.test_count >= lazy.test_count
            )
            if not ok:
                bad.append(bits)
    return CheckResult("scheme bounds / identification / naive >= lazy", not bad, f"N <= {max_n}, {len(bad)} bad")


def check_set_monotone(max_n: int = 10) -> CheckResult:
    """Adding a contaminated item never lowers the test count."""
    bad = 0
    for N in range(1, max_n + 1):
        T = [count_tests(m, N) for m in range(1 << N)]
        bad += sum(1 for m in range(1 << N) for i in range(N) if not m >> i & 1 and T[m] > T[m | 1 << i])
    return CheckResult("pointwise monotone in contaminated set", bad == 0, f"N <= {max_n}, {bad} violations")


def _cdf_dominates(small: np.ndarray, large: np.ndarray, tol: float = 1e-12) -> bool:
    """True iff the law with CDF ``small`` is stochastically <= the one with ``large``."""
    n = max(len(small), len(large))
    a = np.concatenate([small, np.ones(n - len(small))])
    b = np.concatenate([large, np.ones(n - len(large))])
    return bool(np.all(b <= a + tol))


def check_stochastic_order_in_N(max_n: int = 10) -> CheckResult:
    bad = [(N, q) for N in range(1, max_n + 1) for q in Q_GRID
           if not _cdf_dominates(enumerate_distribution(N, q).cdf(), enumerate_distribution(N + 1, q).cdf())]
    return CheckResult("T(N) <=st T(N+1)", not bad, f"N <= {max_n}, q grid, {len(bad)} bad")


def check_stochastic_order_in_q(max_n: int = 10) -> CheckResult:
    bad = []
    for N in range(1, max_n + 1):
        cdfs = {q: enumerate_distribution(N, q).cdf() for q in Q_GRID}
        for q1, q2 in itertools.combinations(Q_GRID, 2):
            # q2 > q1 here: fewer contaminated items, stochastically fewer tests
            if not _cdf_dominates(cdfs[q2], cdfs[q1]):
                bad.append((N, q1, q2))
    return CheckResult("q1 > q2 => T(N;q1) <=st T(N;q2)", not bad, f"N <= {max_n}, {len(bad)} bad")


def check_oracle_equivalence(max_n: int = 12, tol: float = 1e-10) -> CheckResult:
    worst = 0.0
    bad = []
    for N in range(1, max_n + 1):
        for q in Q_GRID:
            oracle = enumerate_distribution(N, q)
            ref = oracle.to_array()
            got = pmf_exact(N, q).to_array()
            pmf_err = float(np.max(np.abs(ref - got)))
            mom = variance_exact(N, q)
            ok = (
                pmf_err <= tol
                and _rel_close(mom.mean, oracle.mean(), tol)
                and _rel_close(mean_exact(N, q), oracle.mean(), tol)
                and abs(mom.variance - oracle.variance()) <= tol * max(oracle.variance(), 1.0)
            )
            worst = max(worst, pmf_err)
            if not ok:
                bad.append((N, q))
    return CheckResult("recursions == enumeration", not bad, f"N <= {max_n}, max pmf err {worst:.1e}, {len(bad)} bad")


def check_closed_form_vs_oracle(max_n: int = 12, variant: Variant = Variant.PAPER_LAZY) -> CheckResult:
    """Closed-form power-of-two mean against brute force of ``variant``."""
    bad = []
    n = 0
    while 2**n <= max_n:
        for q in Q_GRID:
            brute = enumerate_distribution(2**n, q, variant).mean()
            if not _rel_close(mean_closed_form_pow2(n, q), brute, 1e-10):
                bad.append((n, q))
        n += 1
    return CheckResult(f"closed-form mean == enumeration [{variant.value}]", not bad, f"{len(bad)} bad")


def check_closed_forms(max_exponent: int = 10, tol: float = 1e-8) -> CheckResult:
    bad = []
    for n in range(max_exponent + 1):
        for q in Q_GRID:
            m4 = mean_closed_form_pow2(n, q)
            ok = _rel_close(m4, mean_exact(2**n, q), tol)
            if n >= 1:
                ok &= _rel_close(m4, mean_closed_form_pow2_alt(n, q), tol)
            parts = variance_closed_form_pow2(n, q)
            v_rec = variance_exact(2**n, q).variance
            ok &= abs(parts.variance - v_rec) <= tol * max(abs(v_rec), 1e-9)
            ok &= abs((parts.V1 + parts.V2) - (parts.V3 + parts.V4)) <= tol * max(abs(parts.variance), 1e-9)
            if not ok:
                bad.append((n, q))
    return CheckResult("closed forms == recursion, V1+V2 == V3+V4", not bad, f"n <= {max_exponent}, {len(bad)} bad")


def check_bernoulli(draws: int = 100_000, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.uniform(-3.0, 1.0, draws // 2), rng.uniform(0.0, 1.0, draws - draws // 2)])
    gamma = 1.0 + rng.exponential(3.0, draws)
    bad = 0
    for xi, gi in zip(x.tolist(), gamma.tolist()):
        lo, val, hi = bernoulli_bounds(xi, gi)
        # relative slack for rounding in (1 - x)**gamma
        slack = 1e-12 * max(1.0, abs(val))
        if lo > val + slack or (hi is not None and val > hi + slack):
            bad += 1
    eq = all(bernoulli_bounds(0.0, g) == (1.0, 1.0, 1.0 if g >= 2 else None) for g in (1.0, 2.0, 3.5, 10.0))
    eq &= all(bernoulli_bounds(xv, 1.0)[0] == bernoulli_bounds(xv, 1.0)[1] for xv in (-2.0, -0.5, 0.25, 1.0))
    eq &= all(bernoulli_bounds(xv, 2.0)[1] == bernoulli_bounds(xv, 2.0)[2] for xv in (0.0, 0.5, 1.0))
    return CheckResult("Bernoulli-type bounds", bad == 0 and eq, f"{draws} draws, {bad} bad")


def run_all(max_oracle_n: int = 12, closed_form_variant: Variant = Variant.PAPER_LAZY,
            bernoulli_draws: int = 100_000) -> list[CheckResult]:
    small = min(max_oracle_n, 10)
    full = max_oracle_n >= 12
    checks: list[Callable[[], CheckResult]] = [
        lambda: check_scheme_exhaustive(small),
        lambda: check_set_monotone(small),
        lambda: check_stochastic_order_in_N(small),
        lambda: check_stochastic_order_in_q(small),
        lambda: check_oracle_equivalence(max_oracle_n),
        lambda: check_closed_form_vs_oracle(max(max_oracle_n, 2), closed_form_variant),
        lambda: check_closed_forms(10 if full else 3),
        lambda: check_bernoulli(bernoulli_draws if full else min(bernoulli_draws, 10_000)),
    ]
    return [c() for c in checks]
