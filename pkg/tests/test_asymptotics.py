import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bsgt.asymptotics import (
    RegimeSpec,
    UnsupportedRegimeError,
    bernoulli_bounds,
    bound_onset,
    convergence_table,
    mean_asymptote,
    variance_asymptote,
)
from bsgt.exact import mean_exact, variance_exact


def test_bernoulli_examples():
    assert bernoulli_bounds(0.0, 5) == (1.0, 1.0, 1.0)
    assert bernoulli_bounds(0.5, 2) == (0.0, 0.25, 0.25)
    lo, val, hi = bernoulli_bounds(0.1, 3)
    assert lo == pytest.approx(0.7, abs=1e-15)
    assert val == pytest.approx(0.729, abs=1e-15)
    assert hi == pytest.approx(0.73, abs=1e-15)


def test_bernoulli_upper_only_in_its_domain():
    assert bernoulli_bounds(-0.5, 3)[2] is None
    assert bernoulli_bounds(0.5, 1.5)[2] is None


def test_bernoulli_domain():
    with pytest.raises(ValueError):
        bernoulli_bounds(0.2, 0.5)
    with pytest.raises(ValueError):
        bernoulli_bounds(1.5, 2)


@given(st.floats(-5, 1), st.floats(1, 60))
def test_bernoulli_ordering(x, gamma):
    lo, val, hi = bernoulli_bounds(x, gamma)
    slack = 1e-12 * max(1.0, abs(val))
    assert lo <= val + slack
    if hi is not None:
        assert val <= hi + slack


def test_regime_validation_and_clamping():
    with pytest.raises(ValueError):
        RegimeSpec(0, 1)
    with pytest.raises(ValueError):
        RegimeSpec(1, -1)
    assert RegimeSpec(3, 1).prevalence(2) == (1.0, True)
    assert RegimeSpec(1, 1).prevalence(4) == (0.25, False)


def test_mean_asymptote_values():
    assert mean_asymptote(RegimeSpec(2, 1), 1024) == pytest.approx(30.0)
    assert mean_asymptote(RegimeSpec(1, 2), 2**20) == pytest.approx(1 + 1.5 * 20 * 2.0**-20)
    assert mean_asymptote(RegimeSpec(1e-9, 1), 1024) == pytest.approx(1.5e-8)
    expected = 2**0.5 * (1.5 + 0.1) * 2**10 * 20
    assert mean_asymptote(RegimeSpec(1, 0.5), 2**20, delta=0.1) == pytest.approx(expected)
    with pytest.raises(ValueError):
        mean_asymptote(RegimeSpec(1, 1), 1)


def test_variance_asymptote_values():
    assert variance_asymptote(RegimeSpec(1, 1), 2**10) == pytest.approx(225.0)
    assert variance_asymptote(RegimeSpec(1, 2), 2**10) == pytest.approx(225.0 / 1024)
    for beta in (1, 2):
        assert variance_asymptote(RegimeSpec(2, beta), 2**10) == 2 * variance_asymptote(RegimeSpec(1, beta), 2**10)
        assert mean_asymptote(RegimeSpec(2, 1), 2**10) == 2 * mean_asymptote(RegimeSpec(1, 1), 2**10)
    with pytest.raises(UnsupportedRegimeError):
        variance_asymptote(RegimeSpec(1, 0.5), 2**10)


def test_convergence_table_shape():
    rows = convergence_table(RegimeSpec(1, 1), range(3, 9))
    assert [r.n for r in rows] == list(range(3, 9))
    for r in rows:
        assert r.N == 2**r.n and r.p == 2.0**-r.n and not r.clamped
        assert r.mean.ratio == pytest.approx(r.mean.exact_value / r.mean.predicted)
        assert r.mean_residual == pytest.approx(r.mean.exact_value - 1.5 * r.n)
    assert convergence_table(RegimeSpec(4, 1), range(1, 3))[0].clamped
    assert convergence_table(RegimeSpec(1, 0.5), range(2, 4))[0].variance is None
    with pytest.raises(ValueError):
        convergence_table(RegimeSpec(1, 1), range(5, 5))
    with pytest.raises(ValueError):
        convergence_table(RegimeSpec(1, 1), range(0, 3))


def test_beta1_mean_ratio_approaches_one():
    rows = convergence_table(RegimeSpec(1, 1), range(4, 31))
    assert abs(rows[-1].mean.ratio - 1) < 0.1
    gaps = [abs(r.mean.ratio - 1) for r in rows if r.n >= 10]
    assert all(a >= b for a, b in zip(gaps, gaps[1:]))


@pytest.mark.parametrize("a, interval", [
    # measured over n = 10..40, frozen as regression bounds
    (0.5, (0.715, 0.719)),
    (1.0, (-0.044, -0.034)),
    (2.0, (-2.590, -2.559)),
])
def test_beta1_mean_residual_bounded(a, interval):
    res = [r.mean_residual for r in convergence_table(RegimeSpec(a, 1), range(10, 41))]
    assert interval[0] <= min(res) and max(res) <= interval[1]
    assert max(res) - min(res) <= 6


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_beta1_successive_differences(a):
    m = lambda n: mean_exact(2**n, p=a / 2**n)  # noqa: E731
    assert m(31) - m(30) == pytest.approx(1.5 * a, rel=0.01)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_beta1_variance_residual_bounded(a):
    # (Var - 2.25 a n^2) / n stays bounded (the correction is O(n))
    res = [r.variance_residual for r in convergence_table(RegimeSpec(a, 1), range(10, 41))]
    assert max(res) - min(res) < 3 * a


def test_beta2_mean_and_variance_vanish():
    rows = convergence_table(RegimeSpec(1, 2), range(5, 21))
    excess = [r.mean.exact_value - 1 for r in rows]
    var = [r.variance.exact_value for r in rows]
    assert all(a > b for a, b in zip(excess, excess[1:]))
    assert all(a > b for a, b in zip(var, var[1:]))
    assert excess[-1] < 1e-3 and var[-1] < 1e-3
    assert excess[-1] == pytest.approx(1.5 * 20 * 2.0**-20, rel=0.25)


def test_beta_half_bound_onset():
    assert bound_onset(RegimeSpec(1, 0.5), n_max=40, delta=0.1) == 1
    with pytest.raises(UnsupportedRegimeError):
        bound_onset(RegimeSpec(1, 1))


def test_beta_half_bound_is_not_tight():
    # only an upper bound is claimed; the ratio settles well below 1
    rows = convergence_table(RegimeSpec(1, 0.5), range(20, 41, 10))
    assert all(0.2 < r.mean.ratio < 0.5 for r in rows)


def test_general_N_between_powers():
    spec = RegimeSpec(1, 1)
    for N in (1000, 3000, 10**6 + 7):
        p = spec.prevalence(N)[0]
        nu = math.log2(N)
        lo, hi = 2 ** math.floor(nu), 2 ** math.ceil(nu)
        assert mean_exact(lo, p=p) <= mean_exact(N, p=p) <= mean_exact(hi, p=p)
        assert variance_exact(lo, p=p).variance <= variance_exact(hi, p=p).variance
