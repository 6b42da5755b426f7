from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdiffhom.cell import (
    LayeredMatrix,
    PeriodicCoefficient1D,
    arithmetic_mean,
    corrector_1d,
    harmonic_mean,
    homogenize_layered,
    mean_value,
    oscillate,
    panel_nodes,
    verify_against_definition,
)
from fracdiffhom.errors import AsymmetricInput, EllipticityViolation

SQRT3 = math.sqrt(3.0)


def sinusoid():
    return PeriodicCoefficient1D.sinusoid(2.0, 1.0)


def trig_coefficient(mean, amps, period=1.0):
    """Positive trigonometric polynomial with exact bounds from a dense sample."""
    amps = np.asarray(amps, dtype=float)
    k = np.arange(1, amps.size + 1)

    def f(y):
        y = np.asarray(y, dtype=float)
        return mean + np.sin(2 * np.pi * np.multiply.outer(y, k) / period) @ amps

    ys = np.linspace(0, period, 20001)
    vals = f(ys)
    return PeriodicCoefficient1D(f, vals.min() * (1 - 1e-6), vals.max() * (1 + 1e-6), period)


def test_constant():
    a = PeriodicCoefficient1D.constant(2.5)
    assert harmonic_mean(a) == pytest.approx(2.5, rel=1e-14)
    corr = corrector_1d(a)
    np.testing.assert_allclose(corr.chi, 0.0, atol=1e-13)


def test_two_phase_laminate():
    a = PeriodicCoefficient1D.two_phase((1.0, 3.0), 0.5)
    assert abs(harmonic_mean(a) - 1.5) <= 1e-12
    assert arithmetic_mean(a) == pytest.approx(2.0, rel=1e-14)


def test_sinusoid_harmonic_mean():
    assert abs(harmonic_mean(sinusoid(), 10_000) - SQRT3) <= 1e-9


def test_period_scaling():
    a = PeriodicCoefficient1D.sinusoid(2.0, 1.0, period=2.5)
    assert harmonic_mean(a) == pytest.approx(SQRT3, rel=1e-12)


def test_bounds_are_checked():
    bad = PeriodicCoefficient1D(lambda y: 2.0 + np.sin(2 * np.pi * y), 1.5, 3.0)
    with pytest.raises(EllipticityViolation):
        harmonic_mean(bad)


def test_invalid_construction():
    with pytest.raises(ValueError):
        PeriodicCoefficient1D.constant(1.0, period=0.0)
    with pytest.raises(ValueError):
        PeriodicCoefficient1D(lambda y: y, 2.0, 1.0)
    with pytest.raises(ValueError):
        PeriodicCoefficient1D.two_phase((1, 3), 1.0)


def test_table_coefficient_wraps():
    a = PeriodicCoefficient1D.table([0.0, 0.25, 0.5, 0.75], [1.0, 2.0, 3.0, 2.0])
    assert a(1.25) == pytest.approx(2.0)
    assert a(0.875) == pytest.approx(1.5)
    assert (a.nu, a.mu) == (1.0, 3.0)
    with pytest.raises(ValueError):
        PeriodicCoefficient1D.table([0.0, 2.0], [1.0, 2.0])


def test_panel_nodes_integrate_polynomials():
    y, w = panel_nodes(1.0, (0.3,), 64)
    assert np.sum(w) == pytest.approx(1.0, rel=1e-15)
    assert np.dot(w, y**5) == pytest.approx(1 / 6, rel=1e-14)
    with pytest.raises(ValueError):
        panel_nodes(1.0, (), 1)


def test_oscillate():
    a = oscillate(sinusoid(), 0.5)
    x = np.linspace(0, 1, 17)
    np.testing.assert_allclose(a(x), 2 + np.sin(4 * np.pi * x), atol=1e-14)
    assert a.period == 0.5
    c = oscillate(PeriodicCoefficient1D.constant(1.7), 0.01)
    np.testing.assert_allclose(c(x), 1.7)
    with pytest.raises(ValueError):
        oscillate(a, 0.0)


def test_oscillation_weak_limit():
    # windowed averages of a(x/eps) approach the cell mean; only the partial
    # cell at the window edge contributes, so err <= (mu - nu) eps / width
    a = PeriodicCoefficient1D.two_phase((1.0, 3.0), 0.3)
    m = mean_value(a)
    width = 0.37
    x = np.linspace(0.0, width, 400_001)
    errs = []
    for eps in (0.1, 0.05, 0.025, 0.0125, 0.00625):
        errs.append(abs(np.mean(oscillate(a, eps)(x)) - m))
        assert errs[-1] <= (a.mu - a.nu) * eps / width
    assert errs[-1] < 0.2 * errs[0]


def test_corrector_two_phase_slopes():
    corr = corrector_1d(PeriodicCoefficient1D.two_phase((1.0, 3.0), 0.5), 1001)
    slope = np.diff(corr.chi) / np.diff(corr.y)
    assert np.allclose(slope[:499], -0.5, atol=1e-10)
    assert np.allclose(slope[501:], 0.5, atol=1e-10)
    assert corr.chi[0] == pytest.approx(corr.chi[-1], abs=1e-12)


def test_corrector_flux_mean():
    a = sinusoid()
    corr = corrector_1d(a, 4001)
    dw = np.gradient(corr.w, corr.y, edge_order=2)
    flux = a(corr.y) * dw
    # flux is constant and equal to a0
    np.testing.assert_allclose(flux, SQRT3, rtol=1e-5)
    assert np.mean(corr.chi[:-1]) == pytest.approx(0.0, abs=1e-4)


def test_layered_diagonal():
    A = LayeredMatrix.diagonal([sinusoid(), sinusoid()], 1.0, 3.0)
    T = homogenize_layered(A)
    np.testing.assert_allclose(T.matrix, np.diag([SQRT3, 2.0]), atol=1e-12)
    assert verify_against_definition(A, T, 10_000) < 1e-8


def test_layered_constant_matrix():
    C = [[2.0, 0.3], [0.3, 1.5]]
    A = LayeredMatrix(C, 1.0, 3.0)
    T = homogenize_layered(A)
    np.testing.assert_allclose(T.matrix, C, atol=1e-13)
    assert verify_against_definition(A, T) < 1e-13


def test_layered_full():
    # a12 = a21 = 1/2: closed forms give [[sqrt3, 1/2], [1/2, 2]]
    a = sinusoid()
    A = LayeredMatrix([[a, 0.5], [0.5, a]], 0.4, 3.6)
    T = homogenize_layered(A)
    np.testing.assert_allclose(T.matrix, [[SQRT3, 0.5], [0.5, 2.0]], atol=1e-12)
    assert T.is_symmetric() and T.is_elliptic()
    assert verify_against_definition(A, T) < 1e-8


def test_layered_three_dimensional():
    a = sinusoid()
    b = PeriodicCoefficient1D.sinusoid(3.0, 0.5)
    A = LayeredMatrix([[a, 0.2, 0.0], [0.2, b, 0.1], [0.0, 0.1, 2.0]], 0.5, 4.0)
    T = homogenize_layered(A)
    assert T.is_symmetric()
    assert verify_against_definition(A, T) < 1e-8


def test_two_phase_definition_check_first_order():
    a = PeriodicCoefficient1D.two_phase((1.0, 3.0), 0.3)
    A = LayeredMatrix.diagonal([a, 1.0], 1.0, 3.0)
    T = homogenize_layered(A)
    d = [verify_against_definition(A, T, n) for n in (1001, 2001, 4001, 8001)]
    rates = np.log2(np.array(d[:-1]) / np.array(d[1:]))
    assert np.all((rates > 0.8) & (rates < 1.2))


def test_asymmetric_input_rejected():
    A = LayeredMatrix([[2.0, 0.5], [0.1, 2.0]], 1.0, 3.0)
    with pytest.raises(AsymmetricInput):
        homogenize_layered(A)


def test_layered_ellipticity():
    A = LayeredMatrix.diagonal([sinusoid(), 2.0], 1.5, 3.0)
    with pytest.raises(EllipticityViolation):
        homogenize_layered(A)


def test_layered_shape():
    with pytest.raises(ValueError):
        LayeredMatrix([[1.0, 0.0]], 1.0, 2.0)


amplitudes = st.lists(st.floats(-0.2, 0.2), min_size=1, max_size=4)


@settings(max_examples=20, deadline=None)
@given(mean=st.floats(1.0, 5.0), amps=amplitudes)
def test_harmonic_below_arithmetic(mean, amps):
    # sum |amps| <= 0.8 keeps a >= 0.2 * mean
    a = trig_coefficient(mean, np.asarray(amps) * mean)
    h, m = harmonic_mean(a), arithmetic_mean(a)
    assert a.nu <= h <= a.mu
    assert h <= m * (1 + 1e-14)
    if np.max(np.abs(amps)) > 1e-3:
        assert h < m


@settings(max_examples=15, deadline=None)
@given(
    amps=st.lists(st.floats(-0.4, 0.4), min_size=3, max_size=3),
    off=st.floats(-0.5, 0.5),
)
def test_layered_symmetric_elliptic(amps, off):
    a11 = trig_coefficient(2.0, [amps[0]])
    a22 = trig_coefficient(2.5, [amps[1]])

    def a12(y):
        return off + amps[2] * 0.5 * np.sin(2 * np.pi * np.asarray(y))

    def coef(e):
        return e.func if isinstance(e, PeriodicCoefficient1D) else e

    y = np.linspace(0, 1, 4001)
    mats = LayeredMatrix([[coef(a11), coef(a12)], [coef(a12), coef(a22)]], 1e-9, 1e9).sample(y)
    ev = np.linalg.eigvalsh(mats)
    nu, mu = ev.min() * (1 - 1e-6), ev.max() * (1 + 1e-6)
    if nu <= 0:
        return
    A = LayeredMatrix([[coef(a11), coef(a12)], [coef(a12), coef(a22)]], nu, mu)
    T = homogenize_layered(A)
    assert T.is_symmetric(atol=1e-12)
    assert T.is_elliptic()
    assert verify_against_definition(A, T) < 1e-6
