r"""Mittag-Leffler function :math:`E_{\alpha,\beta}(z)` on the real axis.

The evaluator :func:`ml` is tuned for the relaxation kernels
:math:`E_{\alpha,1}(-\lambda t^\alpha)` that appear in every eigen-series, so
the accuracy-guaranteed range is :math:`z \le 0`, :math:`0 < \alpha \le 1`,
:math:`\beta = 1`. Three routes are combined:

* the power series :math:`\sum_k z^k / \Gamma(\alpha k + \beta)` for small
  :math:`|z|`;
* the algebraic asymptotic expansion for large :math:`-z`;
* a Laplace-type integral representation for everything in between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import rgamma

from fracdiffhom.errors import NonConvergence, UnsupportedRange

#: Largest ``|z|`` for which :func:`ml` uses the power series when ``z < 0``.
#: Beyond it the alternating terms cancel and digits are lost.
SERIES_RADIUS = 1.0
#: Largest positive argument accepted by :func:`ml`.
POSITIVE_RADIUS = 5.0
#: Smallest ``-z`` for which the asymptotic expansion is attempted.
ASYMPTOTIC_THRESHOLD = 10.0

DEFAULT_TOL = 1.0e-12
MAX_TERMS = 500


@dataclass(frozen=True)
class MlfOrder:
    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")


def _as_order(order: MlfOrder | float, beta: float = 1.0) -> MlfOrder:
    if isinstance(order, MlfOrder):
        return order
    return MlfOrder(float(order), float(beta))


def ml_series(
    order: MlfOrder | float,
    z: float,
    tol: float = DEFAULT_TOL,
    max_terms: int = MAX_TERMS,
) -> float:
    """Partial sum of the defining power series.

    Summation stops once the next term is below ``tol * (1 + |sum|)``.

    Raises
    ------
    NonConvergence
        If ``max_terms`` terms do not reach the tolerance, which means ``z``
        lies outside the regime where the series is usable.
    """
    order = _as_order(order)
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = order.alpha, order.beta
    z = float(z)
    if z == 0.0:
        return float(rgamma(b))

    total = 0.0
    log_abs_z = math.log(abs(z))
    sign = -1.0 if z < 0 else 1.0
    for k in range(max_terms):
        # z**k / Gamma(a k + b) in log space, so large k does not overflow
        term = sign**k * math.exp(k * log_abs_z - math.lgamma(a * k + b))
        total += term
        # the terms are not monotone for small k when alpha is small
        if k > 2 and abs(term) < tol * (1.0 + abs(total)):
            nxt = (k + 1) * log_abs_z - math.lgamma(a * (k + 1) + b)
            if math.exp(nxt) < tol * (1.0 + abs(total)):
                return total
    raise NonConvergence(
        f"series for E_{{{a},{b}}}({z}) did not converge in {max_terms} terms"
    )


def ml_asymptotic(alpha: float, x: float, K: int) -> tuple[float, float]:
    r"""K-term algebraic expansion of :math:`E_{\alpha,1}(-x)` for large x.

    Returns ``(value, error_estimate)`` where the estimate is the magnitude of
    the first omitted term. Terms whose reciprocal gamma factor sits on a pole
    (``1 - alpha*k`` a non-positive integer) are exactly zero.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if x <= 0:
        raise ValueError("x must be positive")
    value = 0.0
    for k in range(1, K + 1):
        value += (-1.0) ** (k + 1) * float(rgamma(1.0 - alpha * k)) * x ** (-k)
    omitted = abs(float(rgamma(1.0 - alpha * (K + 1)))) * x ** (-(K + 1))
    return value, omitted


def _asymptotic_auto(alpha: float, x: float, rtol: float) -> float | None:
    # Sum until the terms drop below rtol; give up once they start growing,
    # the expansion is divergent.
    value = 0.0
    prev = math.inf
    for k in range(1, 200):
        term = (-1.0) ** (k + 1) * float(rgamma(1.0 - alpha * k)) * x ** (-k)
        mag = abs(term)
        if mag == 0.0:
            continue
        if mag > prev:
            return None
        value += term
        prev = mag
        if mag < rtol * abs(value):
            return value
    return None


def _integral(alpha: float, x: float) -> float:
    # E_a(-x) = sin(a pi)/(a pi) * int_0^inf exp(-v^(1/a)) x / (v^2 + 2 v x cos(a pi) + x^2) dv
    #         = (1/a) int_0^inf phi(v) P_w(v - v0) dv
    # with phi(v) = exp(-v^(1/a)) and P_w the Poisson kernel of width w = x sin(a pi)
    # centred at v0 = -x cos(a pi).
    s = math.sin(alpha * math.pi)
    c = math.cos(alpha * math.pi)
    inv = 1.0 / alpha
    w = x * s
    v0 = -x * c

    def phi(v: float) -> float:
        return math.exp(-(v**inv))

    # phi < 1e-20 beyond this point
    v_max = 46.0**alpha
    if not 0.0 < v0 < v_max:
        def f(v: float) -> float:
            return phi(v) * x / (v * v + 2.0 * v * x * c + x * x)

        val, _ = integrate.quad(f, 0.0, v_max, epsabs=0.0, epsrel=1.0e-13, limit=400, full_output=1)[:2]
        return s / (alpha * math.pi) * val

    # Subtract phi(v0) under the kernel; its integral over [0, v_max] is an
    # arctan difference. This stays finite as alpha -> 1, where the kernel
    # collapses onto v0.
    p0 = phi(v0)
    # fold around v0 so the odd part of phi - p0 cancels under the even kernel
    r = min(v0, v_max - v0)

    def even(d: float) -> float:
        return (phi(v0 + d) + phi(v0 - d) - 2.0 * p0) * w / (d * d + w * w)

    def g(v: float) -> float:
        d = v - v0
        return (phi(v) - p0) * w / (d * d + w * w)

    total, _ = integrate.quad(even, 0.0, r, epsabs=0.0, epsrel=1.0e-13, limit=400, full_output=1)[:2]
    lo, hi = (v0 + r, v_max) if v0 < v_max - v0 else (0.0, v0 - r)
    if hi > lo:
        val, _ = integrate.quad(g, lo, hi, epsabs=0.0, epsrel=1.0e-13, limit=400, full_output=1)[:2]
        total += val
    mass = math.atan((v_max - v0) / w) + math.atan(v0 / w)
    return (total + p0 * mass) / (alpha * math.pi)


def _pole_term(alpha: float, x: float) -> float:
    # size of the exponentially small contribution the algebraic expansion misses
    c = math.cos(alpha * math.pi)
    if c >= 0.0:
        return 0.0
    return math.exp(-((-x * c) ** (1.0 / alpha))) / alpha


def _ml_scalar(order: MlfOrder, z: float) -> float:
    a, b = order.alpha, order.beta
    if z == 0.0:
        return float(rgamma(b))
    if a == 1.0 and b == 1.0:
        return math.exp(z)
    if z > 0.0:
        if z > POSITIVE_RADIUS:
            raise UnsupportedRange(
                f"positive argument {z} exceeds the supported radius {POSITIVE_RADIUS}"
            )
        return ml_series(order, z, tol=1.0e-16)
    x = -z
    if x <= SERIES_RADIUS:
        return ml_series(order, z, tol=1.0e-16)
    if b != 1.0:
        raise UnsupportedRange(
            f"beta={b} is only supported inside the series radius |z| <= {SERIES_RADIUS}"
        )
    if x >= ASYMPTOTIC_THRESHOLD:
        val = _asymptotic_auto(a, x, rtol=1.0e-16)
        if val is not None and _pole_term(a, x) <= 1.0e-16 * abs(val):
            return val
    return _integral(a, x)


def ml(z, alpha: MlfOrder | float, beta: float = 1.0):
    r"""Evaluate :math:`E_{\alpha,\beta}(z)` for real scalar or array ``z``.

    Relative error is below ``1e-10`` on ``[-1e8, 0]`` for
    ``alpha in [0.1, 1 - 1e-5]`` and ``beta = 1``. Closer to ``alpha = 1`` the
    algebraic tail scales like ``1 - alpha`` and the problem itself loses
    about ``eps / (1 - alpha)`` in relative accuracy.

    Parameters
    ----------
    z : float or array_like
        Real argument(s).
    alpha : float or MlfOrder
        Order in ``(0, 1]``. An :class:`MlfOrder` also carries ``beta``.
    beta : float
        Second parameter; values other than 1 are only supported for
        ``|z| <= SERIES_RADIUS``.

    Raises
    ------
    UnsupportedRange
        For ``z > POSITIVE_RADIUS`` or ``beta != 1`` outside the series radius.
    """
    order = _as_order(alpha, beta)
    if np.ndim(z) == 0:
        return _ml_scalar(order, float(z))
    arr = np.asarray(z, dtype=float)
    out = np.empty_like(arr)
    flat = arr.ravel()
    res = out.ravel()
    # repeated arguments are common (many modes share a rate)
    cache: dict[float, float] = {}
    for i, zi in enumerate(flat):
        key = float(zi)
        if key not in cache:
            cache[key] = _ml_scalar(order, key)
        res[i] = cache[key]
    return out


def ml_table(alpha: float, z_values, beta: float = 1.0) -> list[tuple[float, float]]:
    """``(z, E(z))`` pairs used for accuracy audits."""
    zs = np.asarray(z_values, dtype=float)
    vals = ml(zs, alpha, beta)
    return [(float(a), float(b)) for a, b in zip(zs, vals)]
