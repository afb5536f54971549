"""Large-N laws for the test count when prevalence shrinks like a * N**-beta.

The predictions are leading-order terms only. ``convergence_table`` sets
N = 2**n and compares them with the exact recursions, which is how the
asymptotic statements are checked at finite n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exact import MomentRecursion

__all__ = [
    "RegimeSpec",
    "AsymptoteReport",
    "ConvergenceRow",
    "bernoulli_bounds",
    "mean_asymptote",
    "variance_asymptote",
    "convergence_table",
    "bound_onset",
    "UnsupportedRegimeError",
]


class UnsupportedRegimeError(ValueError):
    """No asymptotic law is available for the requested regime."""


@dataclass(frozen=True)
class RegimeSpec:
    a: float
    beta: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a!r}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta!r}")

    def raw_prevalence(self, N: float) -> float:
        return self.a * N ** (-self.beta)

    def prevalence(self, N: float) -> tuple[float, bool]:
        """Return ``(p, clamped)``; p is capped at 1 for small N."""
        p = self.raw_prevalence(N)
        return (1.0, True) if p > 1.0 else (p, False)


@dataclass(frozen=True)
class AsymptoteReport:
    N: int
    exact_value: float
    predicted: float
    ratio: float
    residual: float

    @classmethod
    def compare(cls, N: int, exact_value: float, predicted: float) -> "AsymptoteReport":
        ratio = exact_value / predicted if predicted != 0 else math.nan
        return cls(N, exact_value, predicted, ratio, exact_value - predicted)


def bernoulli_bounds(x: float, gamma: float) -> tuple[float, float, float | None]:
    """``(1 - gamma*x, (1 - x)**gamma, 1 - gamma*x + gamma*(gamma-1)/2 * x**2)``.

    The first entry never exceeds the second for x <= 1 and gamma >= 1. The
    third entry is an upper bound only for x in [0, 1] and gamma >= 2;
    otherwise it is returned as ``None``.
    """
    if gamma < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma!r}")
    if x > 1:
        raise ValueError(f"x must be <= 1, got {x!r}")
    lower = 1.0 - gamma * x
    value = (1.0 - x) ** gamma
    upper = None
    if 0.0 <= x <= 1.0 and gamma >= 2:
        upper = lower + gamma * (gamma - 1) / 2 * x * x
    return lower, value, upper


def mean_asymptote(spec: RegimeSpec, N: int, delta: float = 0.1) -> float:
    """Leading-order prediction for E[T(N)].

    beta == 1: ``1.5 a log2 N``. beta > 1: ``1 + 1.5 a log2(N) N**(1-beta)``.
    beta < 1 has no sharp law, so the upper bound
    ``2**(1-beta) (1.5 a + delta) N**(1-beta) log2 N`` is returned instead.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    log2n = math.log2(N)
    if spec.beta == 1:
        return 1.5 * spec.a * log2n
    if spec.beta > 1:
        return 1.0 + 1.5 * spec.a * log2n * N ** (1.0 - spec.beta)
    return 2 ** (1.0 - spec.beta) * (1.5 * spec.a + delta) * N ** (1.0 - spec.beta) * log2n


def variance_asymptote(spec: RegimeSpec, N: int) -> float:
    """Leading-order prediction for Var[T(N)]: ``2.25 a (log2 N)**2 N**(1-beta)``."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if spec.beta < 1:
        raise UnsupportedRegimeError("no variance law for beta < 1")
    return 2.25 * spec.a * math.log2(N) ** 2 * N ** (1.0 - spec.beta)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    N: int
    p: float
    clamped: bool
    mean: AsymptoteReport
    variance: AsymptoteReport | None
    # E[T] - 1.5 a n, bounded when beta == 1
    mean_residual: float | None
    # (Var - 2.25 a n**2) / n, bounded when beta == 1
    variance_residual: float | None


def convergence_table(spec: RegimeSpec, n_range: range, delta: float = 0.1) -> list[ConvergenceRow]:
    n_values = list(n_range)
    if not n_values:
        raise ValueError("empty exponent range")
    if min(n_values) < 1 or max(n_values) > 50:
        raise ValueError("exponents must lie in [1, 50]")
    rows = []
    for n in sorted(n_values):
        N = 2**n
        p, clamped = spec.prevalence(N)
        rec = MomentRecursion(p=p)
        mean, var = rec(N)[:2]
        mean_rep = AsymptoteReport.compare(N, mean, mean_asymptote(spec, N, delta))
        var_rep = None
        if spec.beta >= 1:
            var_rep = AsymptoteReport.compare(N, var, variance_asymptote(spec, N))
        mean_res = var_res = None
        if spec.beta == 1:
            mean_res = mean - 1.5 * spec.a * n
            var_res = (var - 2.25 * spec.a * n * n) / n
        rows.append(ConvergenceRow(n, N, p, clamped, mean_rep, var_rep, mean_res, var_res))
    return rows


def bound_onset(spec: RegimeSpec, n_max: int = 40, delta: float = 0.1) -> int | None:
    """Smallest n0 such that E[T(2**n)] obeys the beta < 1 bound for n0 .. n_max.

    Returns None if the bound fails at ``n_max`` itself.
    """
    if spec.beta >= 1:
        raise UnsupportedRegimeError("the growth bound is stated for 0 < beta < 1")
    onset = None
    for n in range(n_max, 0, -1):
        N = 2**n
        p, _ = spec.prevalence(N)
        if MomentRecursion(p=p).mean(N) > mean_asymptote(spec, N, delta):
            break
        onset = n
    return onset
