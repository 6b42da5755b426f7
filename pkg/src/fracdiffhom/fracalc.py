r"""Discrete fractional calculus on uniform time grids.

* :func:`rl_integral` -- Riemann-Liouville integral :math:`J^\beta` by
  piecewise-linear product quadrature.
* :func:`caputo_l1` -- Caputo derivative :math:`\partial_t^\alpha` by the L1
  scheme, always applied to :math:`v - v(0)`.

Both are direct O(M^2) convolutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from fracdiffhom.errors import GridMismatch


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_j = j * tau`` on ``[0, t_final]`` with ``steps`` intervals."""

    t_final: float
    steps: int
    tau: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be a positive integer")
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "tau", self.t_final / self.steps)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.steps + 1)

    def __len__(self) -> int:
        return self.steps + 1


@dataclass(frozen=True)
class L1Stencil:
    """L1 weights ``b_j = (j+1)^(1-alpha) - j^(1-alpha)``, ``j = 0..M-1``."""

    alpha: float
    weights: np.ndarray

    @classmethod
    def build(cls, alpha: float, steps: int) -> L1Stencil:
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        return cls(alpha, l1_weights(alpha, steps))


def l1_weights(alpha: float, steps: int) -> np.ndarray:
    j = np.arange(steps, dtype=float)
    return (j + 1.0) ** (1.0 - alpha) - j ** (1.0 - alpha)


def _check(samples, grid: TimeGrid) -> np.ndarray:
    v = np.asarray(samples, dtype=float)
    if v.shape[0] != grid.steps + 1:
        raise GridMismatch(
            f"expected {grid.steps + 1} samples along time, got {v.shape[0]}"
        )
    return v


def rl_integral(samples, grid: TimeGrid, beta: float) -> np.ndarray:
    """Riemann-Liouville integral of order ``beta`` at every grid node.

    ``samples`` is interpolated piecewise linearly and the kernel
    ``(t - s)^(beta-1) / Gamma(beta)`` is integrated exactly against the
    interpolant. Exact for constant and linear data. Extra trailing axes of
    ``samples`` are carried along.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    v = _check(samples, grid)
    M = grid.steps
    out = np.zeros_like(v)
    scale = grid.tau**beta / gamma(beta + 2.0)
    k = np.arange(M + 1, dtype=float)
    p = k ** (beta + 1.0)
    # interior weights depend only on n - j
    interior = np.zeros(M + 1)
    interior[1:M] = p[2 : M + 1] - 2.0 * p[1:M] + p[0 : M - 1]
    for n in range(1, M + 1):
        w = np.empty(n + 1)
        w[0] = (n - 1.0) ** (beta + 1.0) - (n - beta - 1.0) * n**beta
        w[n] = 1.0
        if n > 1:
            w[1:n] = interior[n - 1 : 0 : -1]
        out[n] = scale * np.tensordot(w, v[: n + 1], axes=(0, 0))
    return out


def caputo_l1(samples, grid: TimeGrid, alpha: float) -> np.ndarray:
    """L1 approximation of the Caputo derivative of ``v - v(0)``.

    Returns an array shaped like ``samples``; entry ``j`` holds the
    derivative at ``t_j`` for ``j >= 1`` and entry 0 is set to 0.
    Truncation error is O(tau^(2-alpha)) for C^2 data.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    v = _check(samples, grid)
    M = grid.steps
    b = l1_weights(alpha, M)
    d = np.diff(v, axis=0)
    out = np.zeros_like(v)
    c = grid.tau ** (-alpha) / gamma(2.0 - alpha)
    for n in range(1, M + 1):
        # sum_k b_k (v_{n-k} - v_{n-k-1})
        out[n] = c * np.tensordot(b[:n], d[n - 1 :: -1][:n], axes=(0, 0))
    return out


def verify_inverse_pair(alpha: float, grid: TimeGrid, v) -> float:
    """Max-norm defect of ``J^alpha`` applied to the L1 derivative of ``v - v0``."""
    v = _check(v, grid)
    shifted = v - v[0]
    back = rl_integral(caputo_l1(v, grid, alpha), grid, alpha)
    return float(np.max(np.abs(back - shifted)))
