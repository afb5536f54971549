"""Powers of the clean-item probability that stay accurate when p is tiny.

In the regime p = a/N the naive ``q ** N`` and ``1 - q ** N`` lose most of
their digits, so everything here goes through ``log1p``/``expm1``.
"""

from __future__ import annotations

import math


def check_probability(value: float, name: str = "q") -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def resolve_prevalence(q: float | None = None, p: float | None = None) -> float:
    """Return the contamination probability p from exactly one of ``q``/``p``.

    Passing ``p`` directly avoids the rounding of ``1 - q`` when p is small.
    """
    if (q is None) == (p is None):
        raise ValueError("give exactly one of q or p")
    if p is not None:
        return check_probability(p, "p")
    return 1.0 - check_probability(q, "q")


class PowerTable:
    """``q**m`` and ``1 - q**m`` for integer m >= 0, with q = 1 - p."""

    __slots__ = ("p", "q", "_log_q")

    def __init__(self, p: float):
        self.p = check_probability(p, "p")
        self.q = 1.0 - self.p
        self._log_q = -math.inf if self.p == 1.0 else math.log1p(-self.p)

    def qpow(self, m: int | float) -> float:
        if m == 0:
            return 1.0
        return math.exp(m * self._log_q)

    def one_minus_qpow(self, m: int | float) -> float:
        if m == 0:
            return 0.0
        return -math.expm1(m * self._log_q)

    def split_weights(self, left: int, right: int) -> tuple[float, float]:
        """Probabilities that a positive group's left half is clean / positive.

        The group has ``left + right`` items and is known to hold at least one
        contaminated item. At p = 0 the conditional law is the p -> 0 limit
        (exactly one contaminated item, uniformly placed).
        """
        n = left + right
        if self.p == 0.0:
            return right / n, left / n
        whole = self.one_minus_qpow(n)
        clean_left = self.qpow(left) * self.one_minus_qpow(right) / whole
        return clean_left, self.one_minus_qpow(left) / whole
