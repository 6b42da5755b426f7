"""Effective (homogenized) coefficients of periodic and layered media.

Coefficients are callables on one period ``[0, period)`` plus declared
ellipticity bounds ``nu <= a <= mu``. Known discontinuities are listed as
breakpoints so that composite Gauss-Legendre quadrature never straddles a jump.
Only microstructures with closed-form correctors (1D and layered) are handled.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from fracdiffhom.errors import AsymmetricInput, EllipticityViolation

GAUSS_DEGREE = 8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_DEGREE)
# relative slack when comparing samples against declared bounds
_BOUND_RTOL = 1e-12


@dataclass(frozen=True)
class PeriodicCoefficient1D:
    """A ``period``-periodic scalar coefficient ``a(y)`` with bounds ``nu, mu``."""

    func: Callable[[np.ndarray], np.ndarray]
    nu: float
    mu: float
    period: float = 1.0
    breakpoints: tuple[float, ...] = ()
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.period > 0:
            raise ValueError("period must be positive")
        if not 0 < self.nu <= self.mu:
            raise ValueError(f"need 0 < nu <= mu, got nu={self.nu}, mu={self.mu}")
        bps = tuple(sorted(float(b) for b in self.breakpoints if 0 < b < self.period))
        object.__setattr__(self, "breakpoints", bps)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.asarray(self.func(np.mod(y, self.period)), dtype=float) * np.ones_like(y)

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float, period: float = 1.0) -> PeriodicCoefficient1D:
        value = float(value)
        return cls(lambda y: np.full_like(y, value), value, value, period,
                   kind="constant", params={"value": value})

    @classmethod
    def two_phase(
        cls,
        values: Sequence[float] = (1.0, 3.0),
        fraction: float = 0.5,
        period: float = 1.0,
    ) -> PeriodicCoefficient1D:
        """``values[0]`` on ``[0, fraction*period)``, ``values[1]`` on the rest."""
        a0, a1 = (float(v) for v in values)
        if not 0 < fraction < 1:
            raise ValueError("fraction must lie in (0, 1)")
        cut = fraction * period
        return cls(
            lambda y: np.where(y < cut, a0, a1),
            min(a0, a1),
            max(a0, a1),
            period,
            breakpoints=(cut,),
            kind="two_phase",
            params={"values": [a0, a1], "fraction": float(fraction)},
        )

    @classmethod
    def sinusoid(
        cls, mean: float = 2.0, amplitude: float = 1.0, period: float = 1.0
    ) -> PeriodicCoefficient1D:
        """``mean + amplitude * sin(2 pi y / period)``."""
        mean, amplitude = float(mean), float(amplitude)
        k = 2.0 * math.pi / period
        return cls(
            lambda y: mean + amplitude * np.sin(k * y),
            mean - abs(amplitude),
            mean + abs(amplitude),
            period,
            kind="sinusoid",
            params={"mean": mean, "amplitude": amplitude},
        )

    @classmethod
    def table(
        cls,
        y: Sequence[float],
        values: Sequence[float],
        period: float = 1.0,
        nu: float | None = None,
        mu: float | None = None,
    ) -> PeriodicCoefficient1D:
        """Linear interpolation of ``(y, value)`` samples, wrapped periodically."""
        y = np.asarray(y, dtype=float)
        values = np.asarray(values, dtype=float)
        if y.ndim != 1 or y.shape != values.shape or y.size < 2:
            raise ValueError("table needs matching 1D arrays with at least 2 samples")
        order = np.argsort(y)
        y, values = y[order], values[order]
        if y[0] < 0 or y[-1] > period:
            raise ValueError("table abscissae must lie in [0, period]")
        if y[-1] < period:
            # close the loop so that interpolation wraps around
            y = np.append(y, y[0] + period)
            values = np.append(values, values[0])
        lo = float(values.min()) if nu is None else float(nu)
        hi = float(values.max()) if mu is None else float(mu)
        yy, vv = y.copy(), values.copy()
        return cls(
            lambda s: np.interp(s, yy, vv, period=period),
            lo,
            hi,
            period,
            breakpoints=tuple(float(b) for b in yy[1:-1]),
            kind="table",
            params={"y": yy.tolist(), "values": vv.tolist()},
        )


def panel_nodes(
    period: float, breakpoints: Sequence[float], quad_points: int
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on ``[0, period]``.

    About ``quad_points`` nodes in total, split into degree-8 panels whose
    edges include every breakpoint.
    """
    if quad_points < 2:
        raise ValueError("quad_points must be at least 2")
    edges = np.array([0.0, *sorted(breakpoints), period])
    lengths = np.diff(edges)
    panels = max(math.ceil(quad_points / GAUSS_DEGREE), len(lengths))
    counts = np.maximum(1, np.round(panels * lengths / period).astype(int))
    nodes, weights = [], []
    for lo, hi, n in zip(edges[:-1], edges[1:], counts):
        cuts = np.linspace(lo, hi, n + 1)
        half = 0.5 * np.diff(cuts)
        mid = 0.5 * (cuts[:-1] + cuts[1:])
        nodes.append((mid[:, None] + half[:, None] * _GL_NODES).ravel())
        weights.append((half[:, None] * _GL_WEIGHTS).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def _check_bounds(values: np.ndarray, nu: float, mu: float, what: str = "coefficient"):
    lo, hi = float(np.min(values)), float(np.max(values))
    if lo < nu * (1 - _BOUND_RTOL) or hi > mu * (1 + _BOUND_RTOL):
        raise EllipticityViolation(
            f"{what} samples span [{lo:.6g}, {hi:.6g}], outside declared [{nu}, {mu}]"
        )


def mean_value(a: PeriodicCoefficient1D, quad_points: int = 10_000, transform=None) -> float:
    """Cell average of ``a`` (or of ``transform(a)``)."""
    y, w = panel_nodes(a.period, a.breakpoints, quad_points)
    vals = a(y)
    if transform is not None:
        vals = transform(vals)
    return float(np.dot(w, vals) / a.period)


def harmonic_mean(a: PeriodicCoefficient1D, quad_points: int = 10_000) -> float:
    """Effective 1D coefficient ``1 / mean(1/a)``.

    Raises
    ------
    EllipticityViolation
        If a quadrature sample leaves ``[nu, mu]``.
    """
    y, w = panel_nodes(a.period, a.breakpoints, quad_points)
    vals = a(y)
    _check_bounds(vals, a.nu, a.mu)
    return float(a.period / np.dot(w, 1.0 / vals))


def arithmetic_mean(a: PeriodicCoefficient1D, quad_points: int = 10_000) -> float:
    return mean_value(a, quad_points)


def oscillate(a: PeriodicCoefficient1D, epsilon: float) -> PeriodicCoefficient1D:
    """The rescaled coefficient ``x -> a(x / epsilon)``, of period ``epsilon*period``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    f, period = a.func, a.period
    eps = float(epsilon)
    return PeriodicCoefficient1D(
        lambda x: f(np.mod(x / eps, period)),
        a.nu,
        a.mu,
        period * eps,
        breakpoints=tuple(b * eps for b in a.breakpoints),
        kind=a.kind,
        params={**a.params, "epsilon": eps},
    )


# -- correctors -------------------------------------------------------------


@dataclass(frozen=True)
class Corrector1D:
    """Periodic corrector on a uniform grid of one cell.

    ``w(y) = y - chi(y)`` has slope ``a0 / a(y)``.
    """

    y: np.ndarray
    chi: np.ndarray
    c0: float
    a0: float

    @property
    def w(self) -> np.ndarray:
        return self.y - self.chi


def _cumulative(f, period, breakpoints, grid: np.ndarray, panels_per_cell: int = 2):
    # exact-per-panel Gauss-Legendre integral of f from 0 to every grid node,
    # splitting cells at breakpoints
    edges = np.unique(np.concatenate([grid, [b for b in breakpoints if grid[0] < b < grid[-1]]]))
    seg = np.zeros(len(edges) - 1)
    for k in range(panels_per_cell):
        lo = edges[:-1] + (edges[1:] - edges[:-1]) * k / panels_per_cell
        hi = edges[:-1] + (edges[1:] - edges[:-1]) * (k + 1) / panels_per_cell
        half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
        pts = mid[:, None] + half[:, None] * _GL_NODES
        seg += half * (f(pts) @ _GL_WEIGHTS)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return np.interp(grid, edges, cum)


def corrector_1d(a: PeriodicCoefficient1D, grid_points: int = 1001) -> Corrector1D:
    """Zero-mean periodic corrector ``chi(y) = y - a0 * int_0^y dz/a(z) + C0``."""
    if grid_points < 3:
        raise ValueError("grid_points must be at least 3")
    a0 = harmonic_mean(a)
    y = np.linspace(0.0, a.period, grid_points)
    inv_int = _cumulative(lambda s: 1.0 / a(s), a.period, a.breakpoints, y)
    chi = y - a0 * inv_int
    # zero mean by the trapezoid rule on the closed grid
    c0 = -float(trapezoid(chi, y) / a.period)
    return Corrector1D(y=y, chi=chi + c0, c0=c0, a0=a0)


# -- layered matrices -------------------------------------------------------


def _as_sampler(entry) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(entry, PeriodicCoefficient1D) or callable(entry):
        return entry
    value = float(entry)
    return lambda y: np.full_like(np.asarray(y, dtype=float), value)


@dataclass
class LayeredMatrix:
    """``A(y) = A(y_1)``: an N x N matrix of ``period``-periodic functions of ``y_1``.

    Entries may be :class:`PeriodicCoefficient1D`, plain callables, or numbers.
    """

    entries: list
    nu: float
    mu: float
    period: float = 1.0
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.entries)
        if n == 0 or any(len(row) != n for row in self.entries):
            raise ValueError("entries must form a square matrix")
        bps = set(self.breakpoints)
        for row in self.entries:
            for e in row:
                if isinstance(e, PeriodicCoefficient1D):
                    bps.update(e.breakpoints)
        self.breakpoints = tuple(sorted(b for b in bps if 0 < b < self.period))
        self._samplers = [[_as_sampler(e) for e in row] for row in self.entries]

    @property
    def dim(self) -> int:
        return len(self.entries)

    @classmethod
    def diagonal(cls, diag: Sequence, nu: float, mu: float, period: float = 1.0):
        n = len(diag)
        entries = [[diag[i] if i == j else 0.0 for j in range(n)] for i in range(n)]
        return cls(entries, nu, mu, period)

    def sample(self, y) -> np.ndarray:
        """Array of shape ``y.shape + (N, N)``."""
        y = np.asarray(y, dtype=float)
        n = self.dim
        out = np.empty(y.shape + (n, n))
        for i in range(n):
            for j in range(n):
                out[..., i, j] = self._samplers[i][j](y)
        return out

    def validate(self, y=None) -> None:
        if y is None:
            y, _ = panel_nodes(self.period, self.breakpoints, 2048)
        mats = self.sample(y)
        scale = max(1.0, float(np.max(np.abs(mats))))
        if np.max(np.abs(mats - np.swapaxes(mats, -1, -2))) > 1e-12 * scale:
            raise AsymmetricInput("layered coefficient matrix is not symmetric")
        eig = np.linalg.eigvalsh(mats)
        _check_bounds(eig, self.nu, self.mu, what="eigenvalue of A(y)")


@dataclass(frozen=True)
class HomogenizedTensor:
    """Constant symmetric effective tensor ``A0`` with ellipticity bounds."""

    matrix: np.ndarray
    nu: float
    mu: float

    def __post_init__(self) -> None:
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_symmetric(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.T, atol=atol, rtol=0))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.T))

    def is_elliptic(self, rtol: float = 1e-9) -> bool:
        ev = self.eigenvalues()
        return bool(ev.min() >= self.nu * (1 - rtol) and ev.max() <= self.mu * (1 + rtol))


def homogenize_layered(A: LayeredMatrix, quad_points: int = 10_000) -> HomogenizedTensor:
    """Closed-form effective tensor of a layered medium.

    With ``M`` the cell mean over ``(0, period)``::

        a11* = 1 / M(1/a11)
        a1j* = a11* M(a1j/a11),   ai1* = a11* M(ai1/a11)
        aij* = a11* M(a1j/a11) M(ai1/a11) + M(aij - a1j ai1 / a11)   (i, j >= 2)
    """
    y, w = panel_nodes(A.period, A.breakpoints, quad_points)
    A.validate(y)
    mats = A.sample(y)
    w = w / A.period

    def M(v):
        return float(np.dot(w, v))

    n = A.dim
    a11 = mats[:, 0, 0]
    out = np.empty((n, n))
    out[0, 0] = 1.0 / M(1.0 / a11)
    r_row = [M(mats[:, 0, j] / a11) for j in range(n)]
    r_col = [M(mats[:, i, 0] / a11) for i in range(n)]
    for j in range(1, n):
        out[0, j] = out[0, 0] * r_row[j]
        out[j, 0] = out[0, 0] * r_col[j]
    for i in range(1, n):
        for j in range(1, n):
            out[i, j] = out[0, 0] * r_row[j] * r_col[i] + M(
                mats[:, i, j] - mats[:, 0, j] * mats[:, i, 0] / a11
            )
    return HomogenizedTensor(out, A.nu, A.mu)


def layered_flux_means(A: LayeredMatrix, grid_points: int) -> np.ndarray:
    """Columns ``M(A grad w_{e_i})`` computed from explicit cell correctors.

    For ``xi = e_i`` the corrector depends on ``y_1`` only and
    ``d/dy1 (A grad w)_1 = 0``, so ``(A grad w)_1`` is a constant ``c`` fixed by
    periodicity of ``chi``. Everything is integrated with the periodic
    trapezoid rule on a uniform grid, independently of :func:`homogenize_layered`.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    y = np.arange(grid_points) * (A.period / grid_points)
    mats = A.sample(y)
    n = A.dim
    a11 = mats[:, 0, 0]
    out = np.empty((n, n))
    for i in range(n):
        xi = np.zeros(n)
        xi[i] = 1.0
        # (A grad w)_1 = a11 (xi_1 - chi') + sum_{j>=2} a1j xi_j = c
        rest = mats[:, 0, 1:] @ xi[1:]
        c = (xi[0] + np.mean(rest / a11)) / np.mean(1.0 / a11)
        dchi = xi[0] - (c - rest) / a11
        grad_w = np.tile(xi, (grid_points, 1))
        grad_w[:, 0] -= dchi
        flux = np.einsum("kij,kj->ki", mats, grad_w)
        out[:, i] = flux.mean(axis=0)
    return out


def verify_against_definition(
    A: LayeredMatrix, tensor: HomogenizedTensor, grid_points: int = 10_000
) -> float:
    """Max discrepancy between the cell-problem flux means and ``tensor``."""
    ref = layered_flux_means(A, grid_points)
    return float(np.max(np.abs(ref - tensor.matrix)))
