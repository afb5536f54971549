"""Exact moments, PGF and PMF of the test count T(N).

Every quantity comes from a pair of recursions over group size. ``U`` is the
number of tests spent on a group whose status is unknown, ``P`` the number
spent on a group already known to contain a contaminated item (its own pooled
test not counted). For a positive group of size N split into L = N // 2 and
R = N - L:

* with probability ``q**L (1 - q**R) / (1 - q**N)`` the left half is clean,
  costing 1 + P(R);
* otherwise the left half is positive, costing 1 + P(L) + U(R) with P(L) and
  U(R) independent.

An unknown group costs 1 with probability ``q**N`` and 1 + P(N) otherwise.
Floor/ceil halving from N only ever produces two adjacent sizes per level, so
memoizing on size keeps evaluation at O(log N) even for N near 2**50.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._powers import PowerTable, check_probability, resolve_prevalence
from .scheme import Pmf

__all__ = [
    "MomentSummary",
    "VarianceParts",
    "MomentRecursion",
    "mean_exact",
    "variance_exact",
    "pgf_eval",
    "pmf_exact",
    "mean_closed_form_pow2",
    "mean_closed_form_pow2_alt",
    "variance_closed_form_pow2",
    "MAX_PMF_N",
    "MAX_POW2_EXPONENT",
]

MAX_PMF_N = 4096
MAX_POW2_EXPONENT = 60


@dataclass(frozen=True)
class MomentSummary:
    N: int
    q: float
    mean: float
    second_moment: float
    variance: float


@dataclass(frozen=True)
class VarianceParts:
    V1: float
    V2: float
    V3: float
    V4: float

    @property
    def variance(self) -> float:
        return self.V3 + self.V4


def _check_size(N: int) -> int:
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    return int(N)


class MomentRecursion:
    """Memoized mean/variance recursions for one prevalence value.

    Instances are not thread-safe; create one per thread.
    """

    def __init__(self, q: float | None = None, *, p: float | None = None):
        self.powers = PowerTable(resolve_prevalence(q, p))
        # size -> (E[U], Var[U], E[P], Var[P])
        self._memo: dict[int, tuple[float, float, float, float]] = {1: (1.0, 0.0, 0.0, 0.0)}

    def __call__(self, N: int) -> tuple[float, float, float, float]:
        hit = self._memo.get(N)
        if hit is not None:
            return hit
        L = N // 2
        R = N - L
        _, _, mp_l, vp_l = self(L)
        mu_r, vu_r, mp_r, vp_r = self(R)
        w_clean, w_pos = self.powers.split_weights(L, R)

        # two-component mixture: clean-left branch and positive-left branch
        m_a, v_a = 1.0 + mp_r, vp_r
        m_b, v_b = 1.0 + mp_l + mu_r, vp_l + vu_r
        mean_pos = w_clean * m_a + w_pos * m_b
        var_pos = w_clean * v_a + w_pos * v_b + w_clean * w_pos * (m_a - m_b) ** 2

        r = self.powers.one_minus_qpow(N)
        mean_unk = 1.0 + r * mean_pos
        var_unk = r * var_pos + r * (1.0 - r) * mean_pos**2
        out = (mean_unk, var_unk, mean_pos, var_pos)
        self._memo[N] = out
        return out

    def mean(self, N: int) -> float:
        return self(_check_size(N))[0]

    def variance(self, N: int) -> float:
        return self(_check_size(N))[1]


def mean_exact(N: int, q: float | None = None, *, p: float | None = None) -> float:
    """E[T(N)] for prevalence ``p = 1 - q``.

    Pass ``p`` instead of ``q`` when p is tiny, to keep its full precision.
    """
    return MomentRecursion(q, p=p).mean(N)


def variance_exact(N: int, q: float | None = None, *, p: float | None = None) -> MomentSummary:
    N = _check_size(N)
    rec = MomentRecursion(q, p=p)
    mean, var = rec(N)[:2]
    return MomentSummary(N=N, q=rec.powers.q, mean=mean, second_moment=var + mean * mean, variance=var)


def pgf_eval(N: int, q: float, z: float) -> float:
    """E[z**T(N)] via the generating-function form of the recursions."""
    N = _check_size(N)
    powers = PowerTable(1.0 - check_probability(q))
    z = float(z)
    memo: dict[int, tuple[float, float]] = {1: (z, 1.0)}

    def g(n: int) -> tuple[float, float]:
        if n in memo:
            return memo[n]
        L = n // 2
        R = n - L
        gp_l = g(L)[1]
        gu_r, gp_r = g(R)
        w_clean, w_pos = powers.split_weights(L, R)
        gp = z * (w_clean * gp_r + w_pos * gp_l * gu_r)
        gu = powers.qpow(n) * z + powers.one_minus_qpow(n) * z * gp
        memo[n] = (gu, gp)
        return memo[n]

    return g(N)[0]


def pmf_exact(N: int, q: float | None = None, *, p: float | None = None) -> Pmf:
    """Full distribution of T(N) by running the PGF recursions on coefficients.

    Polynomial products are plain convolutions (``np.convolve``), so the
    result is reproducible bit for bit on a given build.
    """
    N = _check_size(N)
    if N > MAX_PMF_N:
        raise OverflowError(f"pmf_exact supports N <= {MAX_PMF_N}, got {N}")
    powers = PowerTable(resolve_prevalence(q, p))
    z = np.array([0.0, 1.0])
    memo: dict[int, tuple[np.ndarray, np.ndarray]] = {1: (z, np.array([1.0]))}

    def g(n: int) -> tuple[np.ndarray, np.ndarray]:
        if n in memo:
            return memo[n]
        L = n // 2
        R = n - L
        gp_l = g(L)[1]
        gu_r, gp_r = g(R)
        w_clean, w_pos = powers.split_weights(L, R)
        both = np.convolve(gp_l, gu_r)
        inner = np.zeros(len(both))
        inner[: len(gp_r)] += w_clean * gp_r
        inner += w_pos * both
        gp = np.concatenate(([0.0], inner))
        gu = np.zeros(len(gp) + 1)
        gu[1] = powers.qpow(n)
        gu[1:] += powers.one_minus_qpow(n) * gp
        memo[n] = (gu, gp)
        return memo[n]

    gu = g(N)[0]
    weights = np.zeros(2 * N)
    weights[: len(gu)] = gu[: 2 * N]
    return Pmf.from_array(N, weights)


def _check_exponent(n: int) -> int:
    if int(n) != n or not 0 <= n <= MAX_POW2_EXPONENT:
        raise ValueError(f"exponent must be an integer in [0, {MAX_POW2_EXPONENT}], got {n!r}")
    return int(n)


def _powers_for(q: float | None, p: float | None) -> PowerTable:
    return PowerTable(resolve_prevalence(q, p))


def mean_closed_form_pow2(n: int, q: float | None = None, *, p: float | None = None) -> float:
    """E[T(2**n)] from the explicit sum over dyadic levels.

    The sum ``2**(n+1) - 1 - 2**n * sum_k (q**2**k + q**2**(k-1)) / 2**k`` is
    evaluated after moving the constant into the sum, as
    ``1 + 2**n * sum_k ((1 - q**2**k) + (1 - q**2**(k-1))) / 2**k``. The two
    are algebraically identical; the second keeps its accuracy when q -> 1.
    """
    n = _check_exponent(n)
    pw = _powers_for(q, p)
    total = math.fsum((pw.one_minus_qpow(2**k) + pw.one_minus_qpow(2 ** (k - 1))) / 2**k for k in range(1, n + 1))
    value = 1.0 + 2**n * total
    if n >= 1:
        alt = mean_closed_form_pow2_alt(n, p=pw.p)
        if not math.isclose(value, alt, rel_tol=1e-9, abs_tol=1e-12):
            raise ArithmeticError(f"closed forms disagree at n={n}: {value!r} vs {alt!r}")
    return value


def mean_closed_form_pow2_alt(n: int, q: float | None = None, *, p: float | None = None) -> float:
    """The rearranged form ``3*2**(n-1)*(1 - S) + 2**(n-1)*p - q**2**n - 1``.

    Here ``S = sum_{k=1}^{n-1} q**2**k / 2**k``. Only valid for n >= 1 (the
    rearrangement peels off the k = 1 term). ``1 - S`` is evaluated as
    ``2**(1-n) + sum_{k=1}^{n-1} (1 - q**2**k) / 2**k``.
    """
    n = _check_exponent(n)
    if n < 1:
        raise ValueError("the rearranged form needs n >= 1")
    pw = _powers_for(q, p)
    one_minus_s = 2.0 ** (1 - n) + math.fsum(pw.one_minus_qpow(2**k) / 2**k for k in range(1, n))
    # -q**2**n - 1 written as (1 - q**2**n) - 2
    return 3 * 2 ** (n - 1) * one_minus_s + 2 ** (n - 1) * pw.p + pw.one_minus_qpow(2**n) - 2.0


def variance_closed_form_pow2(n: int, q: float | None = None, *, p: float | None = None) -> VarianceParts:
    """Var[T(2**n)] as both the (V1, V2) and the (V3, V4) decompositions.

    V1 and V2 are evaluated literally and cancel heavily against each other
    for large n; V3 + V4 has no such cancellation and is what
    ``VarianceParts.variance`` returns. The two sums are checked against each
    other with a tolerance that accounts for that cancellation.
    """
    n = _check_exponent(n)
    pw = _powers_for(q, p)
    if n == 0:
        return VarianceParts(0.0, 0.0, 0.0, 0.0)
    qp = pw.qpow
    c = pw.one_minus_qpow
    scale = float(2**n)
    ks = range(1, n + 1)

    # running sum over j <= k of (q**2**j + q**2**(j-1)) / 2**j
    running, v1_terms = 0.0, []
    for k in ks:
        running += (qp(2**k) + qp(2 ** (k - 1))) / 2**k
        v1_terms.append((2 * qp(2**k) + qp(2 ** (k - 1))) * (2.0 - running))
    V1 = scale * math.fsum(v1_terms)
    V2 = scale * math.fsum(
        (qp(2 ** (k + 1)) + qp(3 * 2 ** (k - 1)) - 5 * qp(2**k) - 3 * qp(2 ** (k - 1))) / 2**k for k in ks
    )

    # 2 - q**2**j - q**2**(j-1) == (1 - q**2**j) + (1 - q**2**(j-1))
    running, v3_terms = 0.0, []
    for k in ks:
        running += (c(2**k) + c(2 ** (k - 1))) / 2**k
        v3_terms.append((2 * qp(2**k) + qp(2 ** (k - 1))) * running)
    V3 = scale * math.fsum(v3_terms)
    # q**a + q**b - q**c - q**d == (1-q**c) + (1-q**d) - (1-q**a) - (1-q**b)
    V4 = scale * math.fsum(
        (c(2**k) + c(2 ** (k - 1)) - c(2 ** (k + 1)) - c(3 * 2 ** (k - 1))) / 2**k for k in ks
    )

    parts = VarianceParts(V1, V2, V3, V4)
    slack = 1e-8 * abs(V3 + V4) + 64 * np.finfo(float).eps * (abs(V1) + abs(V2) + abs(V3) + abs(V4))
    if abs((V1 + V2) - (V3 + V4)) > slack:
        raise ArithmeticError(f"variance decompositions disagree at n={n}: {V1 + V2!r} vs {V3 + V4!r}")
    return parts
