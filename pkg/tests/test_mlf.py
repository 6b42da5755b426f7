from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfcx

from fracdiffhom.errors import NonConvergence, UnsupportedRange
from fracdiffhom.mlf import MlfOrder, ml, ml_asymptotic, ml_series, ml_table

# E_a(-x) reference values from mpmath (dps=40): closed-form erfc products for
# a = 1/2, Talbot inversion of s^(a-1) / (s^a + 1) otherwise.
MPMATH_REFERENCE = [
    (0.5, 1.0, 0.42758357615580700441),
    (0.5, 2.0, 0.25539567631050574387),
    (0.5, 4.0, 0.13699945762506138989),
    (0.7, 1.5, 0.28384096962173716662),
    (0.3, 2.0, 0.29023222616787535504),
    (0.9, 7.0, 0.020553253921495637885),
    (0.25, 50.0, 0.016097508838799057449),
    (0.7, 100.0, 0.0033696874163059942732),
    (0.7, 1.0e4, 3.3429961379213110827e-5),
    (0.5, 1.0e6, 5.6418958354747419216e-7),
]


@pytest.mark.parametrize("alpha, x, expected", MPMATH_REFERENCE)
def test_against_mpmath(alpha, x, expected):
    assert ml(-x, alpha) == pytest.approx(expected, rel=1e-11)


def test_value_at_zero():
    assert ml(0.0, 0.6) == 1.0
    assert ml(0.0, 0.9) == 1.0
    assert ml(0.0, 0.5, beta=2.0) == pytest.approx(1.0)


def test_exponential_reduction():
    assert ml(-1.0, 1.0) == pytest.approx(0.36787944117144233, rel=1e-15)
    assert ml(-5.0, 1.0) == pytest.approx(6.737946999085467e-3, rel=1e-14)


def test_half_order_small_argument():
    # e^{x^2} erfc(x) at x = 1, and the same point through the raw series
    assert ml(-1.0, 0.5) == pytest.approx(0.42758357615580700, rel=1e-13)
    assert ml_series(0.5, -1.0) == pytest.approx(0.42758357615580700, rel=1e-12)


def test_half_order_at_minus_four():
    # e^{16} erfc(4); the value 0.2554 belongs to z = -2
    assert ml(-4.0, 0.5) == pytest.approx(0.13699945762506139, rel=1e-12)
    assert ml(-2.0, 0.5) == pytest.approx(0.25539567631050574, rel=1e-12)


def test_erfc_identity_both_arguments():
    x = np.linspace(0.1, 6.0, 500)
    np.testing.assert_allclose(ml(-x, 0.5), erfcx(x), rtol=1e-12)
    np.testing.assert_allclose(ml(-(x**2), 0.5), erfcx(x**2), rtol=1e-12)


def test_array_input_keeps_shape():
    z = -np.arange(12.0).reshape(3, 4)
    out = ml(z, 0.5)
    assert out.shape == (3, 4)
    np.testing.assert_allclose(out, erfcx(-z), rtol=1e-12)


def test_beta_series():
    # E_{1,2}(z) = (e^z - 1) / z
    z = -0.7
    assert ml(z, 1.0, beta=2.0) == pytest.approx(math.expm1(z) / z, rel=1e-13)


def test_positive_arguments():
    assert ml(2.0, 1.0) == pytest.approx(math.exp(2.0), rel=1e-14)
    # E_{1/2}(x) = e^{x^2} erfc(-x)
    assert ml(1.5, 0.5) == pytest.approx(erfcx(-1.5), rel=1e-12)
    with pytest.raises(UnsupportedRange):
        ml(6.0, 0.5)


def test_beta_outside_series_range():
    with pytest.raises(UnsupportedRange):
        ml(-3.0, 0.5, beta=2.0)


def test_series_cap():
    with pytest.raises(NonConvergence):
        ml_series(MlfOrder(0.5), -1.0, max_terms=3)


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
def test_order_validation(alpha):
    with pytest.raises(ValueError):
        MlfOrder(alpha)


def test_order_beta_validation():
    with pytest.raises(ValueError):
        MlfOrder(0.5, beta=0.0)


def test_asymptotic_half_order():
    v1, _ = ml_asymptotic(0.5, 1.0e6, 1)
    v2, _ = ml_asymptotic(0.5, 1.0e6, 2)
    assert v1 == pytest.approx(1.0 / (math.sqrt(math.pi) * 1.0e6), rel=1e-14)
    # second term sits on a pole of the reciprocal gamma
    assert v2 == v1
    assert abs(ml(-1.0e6, 0.5) - v1) <= 1e-18


def test_asymptotic_three_terms_within_estimate():
    # the k = 4 and k = 5 terms share a sign here, so the remainder slightly
    # exceeds the first omitted term alone
    value, omitted = ml_asymptotic(0.7, 100.0, 3)
    assert abs(value - ml(-100.0, 0.7)) <= 2.0 * omitted


def test_asymptotic_argument_checks():
    with pytest.raises(ValueError):
        ml_asymptotic(0.5, 10.0, 0)
    with pytest.raises(ValueError):
        ml_asymptotic(0.5, -1.0, 2)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 0.9])
def test_complete_monotonicity_grid(alpha):
    z = np.linspace(-50.0, 0.0, 1000)
    e = ml(z, alpha)
    assert np.all(e > 0)
    assert np.all(np.diff(e) > 0)
    assert e[-1] == 1.0


@pytest.mark.parametrize("alpha", [0.2, 0.35, 0.5, 0.65, 0.8, 0.95])
@pytest.mark.parametrize("x", [1.0e4, 1.0e5, 1.0e7])
def test_asymptotic_consistency(alpha, x):
    lead, _ = ml_asymptotic(alpha, x, 1)
    # size of the first non-vanishing correction
    second = max(abs(ml_asymptotic(alpha, x, k)[0] - ml_asymptotic(alpha, x, k - 1)[0]) for k in (2, 3))
    assert abs(ml(-x, alpha) - lead) <= 2.0 * second


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.05, 1.0),
    x1=st.floats(0.0, 200.0),
    x2=st.floats(0.0, 200.0),
)
def test_monotone_and_bounded(alpha, x1, x2):
    lo, hi = sorted((x1, x2))
    e_lo, e_hi = ml(-lo, alpha), ml(-hi, alpha)
    assert 0.0 < e_hi <= e_lo <= 1.0


@settings(max_examples=40, deadline=None)
@given(z=st.floats(-30.0, 0.0))
def test_alpha_one_is_exp(z):
    assert abs(ml(z, 1.0) - math.exp(z)) <= 1e-12 * math.exp(z)


def test_table():
    rows = ml_table(0.5, [0.0, -1.0])
    assert rows[0] == (0.0, 1.0)
    assert rows[1][1] == pytest.approx(0.427583576155807, rel=1e-12)


def test_alpha_just_below_one():
    # the integral kernel collapses onto a point; values must stay finite and
    # close to the exponential
    assert ml(-2.0, 0.9999999999999999) == pytest.approx(math.exp(-2.0), rel=1e-12)
    # mpmath Talbot inversion at alpha = 0.99999 (as a double), x = 3
    assert ml(-3.0, 0.99999) == pytest.approx(0.049790762600487333463, rel=1e-11)
