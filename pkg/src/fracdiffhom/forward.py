r"""Forward solvers for :math:`\partial_t^\alpha u - \mathrm{div}(A \nabla u) + q u = f`.

Two routes:

* eigen-expansions with Mittag-Leffler time factors for constant (scalar or
  diagonal layered) coefficients with homogeneous Dirichlet data;
* an L1 / conservative finite-difference scheme on ``(0, L)`` for oscillating
  coefficients ``a(x / eps)``.

Plus the space-time L2 distance and the observation functionals (point value,
space-time region integral, time trace) used by the inverse solvers.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded
from scipy.special import gamma

from fracdiffhom.cell import PeriodicCoefficient1D, harmonic_mean, oscillate, panel_nodes
from fracdiffhom.errors import (
    CoefficientOutOfBounds,
    EllipticityViolation,
    GridMismatch,
    OutOfDomain,
    ResolutionWarning,
    SingularSystem,
)
from fracdiffhom.fracalc import TimeGrid, l1_weights
from fracdiffhom.mlf import ml

#: minimum grid nodes per coefficient period in :func:`fdm_solve`
NODES_PER_PERIOD = 16


@dataclass(frozen=True)
class IntervalDomain:
    length: float = math.pi

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ValueError("length must be positive")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class CylinderDomain:
    """``(0, delta) x D`` with ``D`` a rectangle ``prod (0, L_i)``, N = 2 or 3."""

    delta: float = math.pi
    lengths: tuple[float, ...] = (math.pi,)

    def __post_init__(self) -> None:
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        object.__setattr__(self, "lengths", lengths)
        if not self.delta > 0 or any(v <= 0 for v in lengths):
            raise ValueError("all side lengths must be positive")
        if len(lengths) not in (1, 2):
            raise ValueError("only N = 2 or N = 3 cylinders are supported")

    @property
    def dim(self) -> int:
        return 1 + len(self.lengths)

    @property
    def sides(self) -> tuple[float, ...]:
        return (self.delta, *self.lengths)


# -- eigenpairs ---------------------------------------------------------------


@dataclass(frozen=True)
class Eigenpairs:
    """Dirichlet eigenpairs of ``-d^2/dx^2`` on ``(0, L)``, ``k = 1..n_max``."""

    length: float
    values: np.ndarray

    @property
    def n_max(self) -> int:
        return self.values.size

    def basis(self, x) -> np.ndarray:
        """``phi_k(x)`` for all k; shape ``(n_max, len(x))``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = np.arange(1, self.n_max + 1)[:, None]
        return math.sqrt(2.0 / self.length) * np.sin(k * math.pi * x[None, :] / self.length)

    def integrals(self, a: float, b: float) -> np.ndarray:
        """``int_a^b phi_k`` for all k."""
        k = np.arange(1, self.n_max + 1)
        w = k * math.pi / self.length
        return math.sqrt(2.0 / self.length) * (np.cos(w * a) - np.cos(w * b)) / w


def dirichlet_eigs(domain: IntervalDomain | float, n_max: int = 64) -> Eigenpairs:
    """``lambda_k = (k pi / L)^2``, ``phi_k = sqrt(2/L) sin(k pi x / L)``."""
    L = domain.length if isinstance(domain, IntervalDomain) else float(domain)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    k = np.arange(1, n_max + 1)
    return Eigenpairs(L, (k * math.pi / L) ** 2)


def project_initial(u0: Callable, length: float, n_modes: int, quad_points: int = 8192) -> np.ndarray:
    """L2 coefficients ``(u0, phi_k)`` for ``k = 1..n_modes`` by Gauss-Legendre quadrature."""
    x, w = panel_nodes(length, (), max(quad_points, 16 * n_modes))
    vals = np.asarray(u0(x), dtype=float) * np.ones_like(x)
    return dirichlet_eigs(length, n_modes).basis(x) @ (w * vals)


def _coefficients(u0, length: float, n_max: int) -> tuple[np.ndarray, float]:
    """Truncated coefficients and the tail sum of ``|c_n|`` beyond ``n_max``."""
    if callable(u0):
        c = project_initial(u0, length, 4 * n_max)
    else:
        c = np.asarray(u0, dtype=float).ravel()
    tail = float(np.sum(np.abs(c[n_max:])))
    c = c[:n_max]
    if c.size < n_max:
        c = np.concatenate([c, np.zeros(n_max - c.size)])
    return c, tail


def _check_range(value: float, nu: float | None, mu: float | None, name: str) -> None:
    if nu is not None and value < nu or mu is not None and value > mu:
        raise CoefficientOutOfBounds(f"{name}={value} outside admissible [{nu}, {mu}]")


# -- spectral solutions -------------------------------------------------------


@dataclass(frozen=True)
class SpectralSolution:
    r"""Truncated eigen-expansion ``u(x,t) = sum_n E_{a,1}(-r_n t^a) c_n phi_n(x)``.

    ``rates`` are the decay rates ``r_n`` (``p lambda_n`` in 1D,
    ``p Lambda_n + Lambda~_m`` for layered media); ``eigenvalues`` are the
    unscaled operator eigenvalues. Instances are immutable and thread safe.
    """

    alpha: float
    p: float
    domain: IntervalDomain | CylinderDomain
    rates: np.ndarray
    eigenvalues: np.ndarray
    coeffs: np.ndarray
    indices: np.ndarray
    tail_bound: float = 0.0
    b: tuple[float, ...] = ()

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    @property
    def sup_phi(self) -> float:
        return float(np.prod([math.sqrt(2.0 / s) for s in _sides(self.domain)]))

    def _active(self) -> np.ndarray:
        return np.flatnonzero(self.coeffs)

    def basis(self, points, modes=None) -> np.ndarray:
        """Eigenfunctions of the selected modes at ``points``; ``(n_modes, n_points)``."""
        modes = np.arange(self.n_modes) if modes is None else np.asarray(modes)
        pts = _as_points(points, self.domain)
        out = np.ones((modes.size, pts.shape[0]))
        for d, side in enumerate(_sides(self.domain)):
            k = self.indices[modes, d][:, None]
            out *= math.sqrt(2.0 / side) * np.sin(k * math.pi * pts[None, :, d] / side)
        return out

    def time_factors(self, t, modes=None) -> np.ndarray:
        """``E_{a,1}(-r_n t^a)``; shape ``(len(t), n_modes)``."""
        modes = np.arange(self.n_modes) if modes is None else np.asarray(modes)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < 0):
            raise OutOfDomain("times must be non-negative")
        z = -self.rates[modes][None, :] * t[:, None] ** self.alpha
        return ml(z, self.alpha)

    def evaluate(self, points, t) -> np.ndarray:
        """Solution on the tensor product ``t x points``; shape ``(len(t), n_points)``."""
        modes = self._active()
        pts = _as_points(points, self.domain)
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if modes.size == 0:
            return np.zeros((tt.size, pts.shape[0]))
        return (self.time_factors(tt, modes) * self.coeffs[modes]) @ self.basis(pts, modes)

    __call__ = evaluate

    def to_json(self) -> str:
        doc = {
            "alpha": self.alpha,
            "p": self.p,
            "b": list(self.b),
            "domain": _domain_dict(self.domain),
            "tail_bound": self.tail_bound,
            "modes": [
                {
                    "index": [int(v) for v in self.indices[i]],
                    "lambda": float(self.eigenvalues[i]),
                    "rate": float(self.rates[i]),
                    "coeff": float(self.coeffs[i]),
                }
                for i in range(self.n_modes)
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> SpectralSolution:
        doc = json.loads(text)
        dom = doc["domain"]
        if dom["kind"] == "interval":
            domain = IntervalDomain(dom["length"])
        else:
            domain = CylinderDomain(dom["delta"], tuple(dom["lengths"]))
        modes = doc["modes"]
        return cls(
            alpha=doc["alpha"],
            p=doc["p"],
            domain=domain,
            rates=np.array([m["rate"] for m in modes]),
            eigenvalues=np.array([m["lambda"] for m in modes]),
            coeffs=np.array([m["coeff"] for m in modes]),
            indices=np.array([m["index"] for m in modes], dtype=int).reshape(len(modes), -1),
            tail_bound=doc.get("tail_bound", 0.0),
            b=tuple(doc.get("b", ())),
        )


def _sides(domain) -> tuple[float, ...]:
    if isinstance(domain, IntervalDomain):
        return (domain.length,)
    return domain.sides


def _domain_dict(domain) -> dict:
    if isinstance(domain, IntervalDomain):
        return {"kind": "interval", "length": domain.length}
    return {"kind": "cylinder", "delta": domain.delta, "lengths": list(domain.lengths)}


def _as_points(points, domain) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    n = len(_sides(domain))
    if n == 1:
        pts = pts.reshape(-1, 1)
    else:
        pts = np.atleast_2d(pts)
        if pts.shape[-1] != n:
            raise OutOfDomain(f"points need {n} coordinates")
    sides = np.array(_sides(domain))
    if np.any(pts < -1e-12) or np.any(pts > sides + 1e-12):
        raise OutOfDomain("evaluation point outside the domain")
    return pts


def spectral_solve(
    domain: IntervalDomain | float,
    p: float,
    alpha: float,
    u0,
    n_max: int = 64,
    nu: float | None = None,
    mu: float | None = None,
) -> SpectralSolution:
    """Eigen-expansion solution of ``d_t^a u - p u'' = 0`` on ``(0, L)``.

    ``u0`` is either a sequence of coefficients ``(u0, phi_k)`` or a callable,
    projected onto the first ``n_max`` modes. The reported ``tail_bound`` is
    ``sum_{n > n_max} |c_n| * sup|phi|``.
    """
    if not isinstance(domain, IntervalDomain):
        domain = IntervalDomain(float(domain))
    _check_range(p, nu, mu, "p")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    eig = dirichlet_eigs(domain, n_max)
    c, tail = _coefficients(u0, domain.length, n_max)
    return SpectralSolution(
        alpha=float(alpha),
        p=float(p),
        domain=domain,
        rates=float(p) * eig.values,
        eigenvalues=eig.values,
        coeffs=c,
        indices=np.arange(1, n_max + 1)[:, None],
        tail_bound=tail * math.sqrt(2.0 / domain.length),
    )


def layered_rates(
    domain: CylinderDomain, p: float, b: Sequence[float], truncation
) -> tuple[np.ndarray, np.ndarray]:
    """Decay rates ``p Lambda_n + Lambda~_m`` and eigenvalues ``Lambda_n + Lambda~_m``.

    Arrays are indexed by the multi-index ``(n, m_2[, m_3]) - 1``.
    ``Lambda~`` are the eigenvalues of ``-sum b_i d_i^2`` on the rectangle.
    """
    b = tuple(float(v) for v in np.atleast_1d(b))
    if len(b) != len(domain.lengths):
        raise ValueError("need one transverse coefficient per transverse direction")
    truncation = _truncation(truncation, domain)
    Lam = (np.arange(1, truncation[0] + 1) * math.pi / domain.delta) ** 2
    shape = tuple(truncation)
    lam_t = np.zeros(shape[1:])
    for d, (bd, Ld) in enumerate(zip(b, domain.lengths)):
        m = (np.arange(1, truncation[d + 1] + 1) * math.pi / Ld) ** 2
        view = [1] * len(shape[1:])
        view[d] = -1
        lam_t = lam_t + bd * m.reshape(view)
    rates = p * Lam.reshape((-1,) + (1,) * lam_t.ndim) + lam_t[None]
    eigs = Lam.reshape((-1,) + (1,) * lam_t.ndim) + lam_t[None]
    return rates, eigs


def _truncation(truncation, domain: CylinderDomain) -> tuple[int, ...]:
    if np.ndim(truncation) == 0:
        return (int(truncation),) * domain.dim
    t = tuple(int(v) for v in truncation)
    if len(t) != domain.dim:
        raise ValueError("truncation needs one entry per dimension")
    return t


def spectral_solve_layered(
    domain: CylinderDomain,
    p: float,
    b: Sequence[float],
    alpha: float,
    u0,
    truncation=32,
    nu: float | None = None,
    mu: float | None = None,
) -> SpectralSolution:
    """Eigen-expansion for ``d_t^a u - p d_1^2 u - sum_i b_i d_i^2 u = 0`` on a cylinder.

    ``u0`` is an array of coefficients indexed by ``(n, m_2[, m_3]) - 1`` or a
    callable of a ``(npts, N)`` point array, projected by tensor quadrature.
    """
    _check_range(p, nu, mu, "p")
    for i, bi in enumerate(np.atleast_1d(b)):
        _check_range(float(bi), nu, mu, f"b_{i + 2}")
    trunc = _truncation(truncation, domain)
    rates, eigs = layered_rates(domain, p, b, trunc)
    tail = 0.0
    if callable(u0):
        coeffs = _project_layered(u0, domain, trunc)
    else:
        given = np.asarray(u0, dtype=float)
        if given.ndim != domain.dim:
            raise ValueError("coefficient array must have one axis per dimension")
        coeffs = np.zeros(trunc)
        keep = tuple(slice(0, min(g, t)) for g, t in zip(given.shape, trunc))
        coeffs[keep] = given[keep]
        tail = float(np.sum(np.abs(given)) - np.sum(np.abs(given[keep])))
    idx = np.stack(np.meshgrid(*[np.arange(1, t + 1) for t in trunc], indexing="ij"), -1)
    order = np.argsort(rates.ravel(), kind="stable")
    sol = SpectralSolution(
        alpha=float(alpha),
        p=float(p),
        domain=domain,
        rates=rates.ravel()[order],
        eigenvalues=eigs.ravel()[order],
        coeffs=coeffs.ravel()[order],
        indices=idx.reshape(-1, domain.dim)[order],
        b=tuple(float(v) for v in np.atleast_1d(b)),
    )
    return _with_tail(sol, tail)


def _with_tail(sol: SpectralSolution, tail: float) -> SpectralSolution:
    object.__setattr__(sol, "tail_bound", tail * sol.sup_phi)
    return sol


def _project_layered(u0, domain: CylinderDomain, trunc) -> np.ndarray:
    axes, weights, bases = [], [], []
    for side, n in zip(domain.sides, trunc):
        x, w = panel_nodes(side, (), max(256, 16 * n))
        axes.append(x)
        weights.append(w)
        bases.append(dirichlet_eigs(side, n).basis(x) * w)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    vals = np.asarray(u0(mesh.reshape(-1, domain.dim)), dtype=float).reshape(mesh.shape[:-1])
    out = vals
    for d, B in enumerate(bases):
        out = np.moveaxis(np.tensordot(B, out, axes=(1, d)), 0, d)
    return out


def eigenvalue_ordering_holds(domain: CylinderDomain, p: float, b, n_max: int = 32) -> bool:
    """True when ``p Lambda_1 + Lambda~_1`` is strictly below every other rate."""
    rates, _ = layered_rates(domain, p, b, n_max)
    first = rates.flat[0]
    others = np.delete(rates.ravel(), 0)
    return bool(np.all(first < others))


# -- finite differences -------------------------------------------------------


@dataclass
class Field:
    """Space-time samples ``values[n, j] = u(x_j, t_n)`` with Dirichlet ends."""

    x: np.ndarray
    grid: TimeGrid
    values: np.ndarray

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def at(self, x0: float, t0: float) -> float:
        """Bilinear interpolation."""
        if not self.x[0] <= x0 <= self.x[-1] or not 0 <= t0 <= self.grid.t_final:
            raise OutOfDomain(f"({x0}, {t0}) outside the field")
        row = np.array([np.interp(x0, self.x, r) for r in self.values])
        return float(np.interp(t0, self.t, row))

    def interpolate(self, x, t) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if x.min() < self.x[0] - 1e-12 or x.max() > self.x[-1] + 1e-12:
            raise OutOfDomain("x outside the field")
        if t.min() < -1e-12 or t.max() > self.grid.t_final * (1 + 1e-12):
            raise OutOfDomain("t outside the field")
        in_x = np.array([np.interp(x, self.x, r) for r in self.values])
        return np.array([np.interp(t, self.t, col) for col in in_x.T]).T

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [repr(float(v)) for v in self.x])
            for tn, row in zip(self.t, self.values):
                w.writerow([repr(float(tn))] + [repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> Field:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        x = np.array([float(v) for v in rows[0][1:]])
        data = np.array([[float(v) for v in r] for r in rows[1:]])
        t = data[:, 0]
        grid = TimeGrid(float(t[-1]), len(t) - 1)
        return cls(x, grid, data[:, 1:])


def _sample(fun, x: np.ndarray) -> np.ndarray:
    if fun is None:
        return np.zeros_like(x)
    if callable(fun):
        return np.asarray(fun(x), dtype=float) * np.ones_like(x)
    return np.asarray(fun, dtype=float) * np.ones_like(x)


def resolution_ok(a, length: float, J: int) -> bool:
    """``J >= 16 * L / period`` for oscillating coefficients; constants always pass."""
    if isinstance(a, PeriodicCoefficient1D) and a.nu != a.mu:
        return J >= NODES_PER_PERIOD * length / a.period
    return True


def fdm_solve(
    a,
    u0,
    length: float,
    grid: TimeGrid,
    J: int,
    alpha: float,
    q=None,
    f: Callable | None = None,
) -> Field:
    """L1-in-time, conservative-in-space solve of the Dirichlet problem on ``(0, L)``.

    Each step solves the symmetric tridiagonal system

        c b_0 u^n + L_h u^n + q u^n = f^n + c b_0 u^{n-1} - c sum_{k>=1} b_k (u^{n-k} - u^{n-k-1})

    with ``c = tau^-a / Gamma(2-a)`` and face coefficients ``a_{j+1/2}`` the
    harmonic mean of the nodal samples ``a(x_j), a(x_{j+1})``.

    Parameters
    ----------
    a : PeriodicCoefficient1D, callable or float
        Diffusion coefficient on ``(0, L)`` (already oscillating if wanted).
    u0 : callable or array
        Initial state at the ``J + 1`` nodes; boundary values are overwritten by 0.
    q : callable, array or float, optional
        Non-negative reaction coefficient.
    f : callable, optional
        Source ``f(x, t)`` evaluated at the interior nodes.

    Warns
    -----
    ResolutionWarning
        If fewer than 16 nodes resolve one period of ``a``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if J < 2:
        raise ValueError("need at least 2 space intervals")
    if not resolution_ok(a, length, J):
        warnings.warn(
            f"J={J} gives fewer than {NODES_PER_PERIOD} nodes per coefficient period",
            ResolutionWarning,
            stacklevel=2,
        )
    x = np.linspace(0.0, length, J + 1)
    h = length / J
    av = _sample(a, x)
    if np.any(av <= 0):
        raise EllipticityViolation("diffusion coefficient must be positive")
    if isinstance(a, PeriodicCoefficient1D):
        lo, hi = av.min(), av.max()
        if lo < a.nu * (1 - 1e-12) or hi > a.mu * (1 + 1e-12):
            raise EllipticityViolation(f"samples [{lo}, {hi}] outside [{a.nu}, {a.mu}]")
    qv = _sample(q, x)
    if np.any(qv < 0):
        raise ValueError("reaction coefficient must be non-negative")
    face = 2.0 / (1.0 / av[:-1] + 1.0 / av[1:])

    M = grid.steps
    b = l1_weights(alpha, M)
    c = grid.tau ** (-alpha) / gamma(2.0 - alpha)
    n_in = J - 1
    # upper-form banded storage of the SPD matrix
    ab = np.zeros((2, n_in))
    ab[1] = c * b[0] + (face[:-1] + face[1:]) / h**2 + qv[1:-1]
    ab[0, 1:] = -face[1:-1] / h**2
    try:
        chol = cholesky_banded(ab)
    except LinAlgError as exc:
        raise SingularSystem("space-time system is not positive definite") from exc

    values = np.zeros((M + 1, J + 1))
    u_init = _sample(u0, x)
    values[0, 1:-1] = u_init[1:-1]
    diffs = np.zeros((M, n_in))
    t = grid.nodes
    for n in range(1, M + 1):
        rhs = c * b[0] * values[n - 1, 1:-1]
        if n > 1:
            # history: sum_{k=1}^{n-1} b_k d^{n-k}, d^m stored at diffs[m-1]
            rhs -= c * (b[1:n] @ diffs[n - 2 :: -1][: n - 1])
        if f is not None:
            rhs += _sample(lambda xx: f(xx, t[n]), x[1:-1])  # noqa: B023 (called immediately)
        u = cho_solve_banded((chol, False), rhs)
        values[n, 1:-1] = u
        diffs[n - 1] = u - values[n - 1, 1:-1]
    return Field(x, grid, values)


def reduce_layered_to_1d(p_coef, a2_coef, m: int, L2: float):
    """Modal reduction of the N=2 diagonal layered problem.

    For ``u = v(x1, t) sin(m pi x2 / L2)`` the 2D equation with coefficients
    ``diag(p(x1), a2(x1))`` becomes a 1D problem for ``v`` with diffusion
    ``p`` and reaction ``q(x1) = a2(x1) (m pi / L2)^2``.

    Returns
    -------
    (a, q)
        The 1D diffusion coefficient (``p_coef`` itself) and the reaction callable.
    """
    if int(m) != m or m < 1:
        raise ValueError("transverse Dirichlet modes start at m = 1")
    k2 = (m * math.pi / L2) ** 2
    a2 = a2_coef

    def q(x):
        return _sample(a2, np.asarray(x, dtype=float)) * k2

    return p_coef, q


# -- norms and observations ---------------------------------------------------


def l2_space_time_distance(u, v, x=None, t=None) -> float:
    """Trapezoid approximation of ``||u - v||`` in ``L2(0,T; L2(Omega))`` (1D).

    ``u`` and ``v`` may be :class:`Field` or :class:`SpectralSolution`; fields
    fix the common grid, otherwise ``x`` and ``t`` must be given.
    """
    fields = [w for w in (u, v) if isinstance(w, Field)]
    if len(fields) == 2:
        if u.x.shape != v.x.shape or not np.allclose(u.x, v.x) or u.grid != v.grid:
            raise GridMismatch("fields live on different grids")
    if fields:
        x, t = fields[0].x, fields[0].t
    elif x is None or t is None:
        raise GridMismatch("x and t are required when no Field is given")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)

    def on_grid(w):
        if isinstance(w, Field):
            return w.values
        if isinstance(w, SpectralSolution):
            return w.evaluate(x, t)
        arr = np.asarray(w, dtype=float)
        if arr.shape != (t.size, x.size):
            raise GridMismatch(f"array shape {arr.shape} != {(t.size, x.size)}")
        return arr

    diff2 = (on_grid(u) - on_grid(v)) ** 2
    return float(math.sqrt(trapezoid(trapezoid(diff2, x, axis=1), t)))


@dataclass(frozen=True)
class Point:
    x0: float | tuple
    t0: float


@dataclass(frozen=True)
class Region:
    """``int_I int_omega u``; ``omega`` is one interval per space dimension."""

    omega: tuple
    interval: tuple[float, float]
    nx: int = 201
    nt: int = 201

    def intervals(self) -> list[tuple[float, float]]:
        om = self.omega
        if np.ndim(om[0]) == 0:
            return [tuple(float(v) for v in om)]
        return [tuple(float(v) for v in w) for w in om]


@dataclass(frozen=True)
class Trace:
    x0: float | tuple
    times: tuple = field(default=())


Observation = Point | Region | Trace


def _check_inside(lo_hi: Sequence[float], upper: float, what: str):
    lo, hi = lo_hi
    if not 0 <= lo <= hi <= upper:
        raise OutOfDomain(f"{what} [{lo}, {hi}] not inside [0, {upper}]")


def observe(u, obs: Observation):
    """Apply an observation functional to a :class:`Field` or :class:`SpectralSolution`."""
    if isinstance(u, Field):
        sides = (u.x[-1],)
        t_max = u.grid.t_final
    else:
        sides = _sides(u.domain)
        t_max = math.inf

    if isinstance(obs, (Point, Trace)):
        x0 = np.atleast_1d(np.asarray(obs.x0, dtype=float))
        if x0.size != len(sides) or np.any(x0 < 0) or np.any(x0 > np.array(sides)):
            raise OutOfDomain(f"x0={obs.x0} outside the domain")
        times = np.atleast_1d(np.asarray(obs.t0 if isinstance(obs, Point) else obs.times, dtype=float))
        if times.size == 0 or times.min() < 0 or times.max() > t_max:
            raise OutOfDomain("observation time outside (0, T)")
        if isinstance(u, Field):
            vals = u.interpolate(x0, times)[:, 0]
        else:
            vals = u.evaluate(x0.reshape(1, -1), times)[:, 0]
        return float(vals[0]) if isinstance(obs, Point) else vals

    if isinstance(obs, Region):
        ivs = obs.intervals()
        if len(ivs) != len(sides):
            raise OutOfDomain("region needs one interval per space dimension")
        for iv, side in zip(ivs, sides):
            _check_inside(iv, side, "omega")
        _check_inside(obs.interval, t_max, "time interval")
        t = np.linspace(*obs.interval, obs.nt)
        axes = [np.linspace(lo, hi, obs.nx) for lo, hi in ivs]
        if isinstance(u, Field):
            vals = u.interpolate(axes[0], t)
        else:
            mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(sides))
            vals = u.evaluate(mesh, t).reshape((t.size,) + tuple(a.size for a in axes))
        out = vals
        for ax in reversed(axes):
            out = trapezoid(out, ax, axis=-1)
        return float(trapezoid(out, t))

    raise TypeError(f"unknown observation {obs!r}")


# -- homogenization study -----------------------------------------------------


def homogenization_study(
    a: PeriodicCoefficient1D,
    epsilons: Sequence[float],
    alpha: float = 0.5,
    length: float = 1.0,
    t_final: float = 1.0,
    u0=None,
    J: int | None = None,
    M: int | None = None,
    reference: str = "fdm",
    map_fn=map,
) -> list[dict]:
    """Distances ``||u^eps - u^0||`` in ``L2(0,T;L2)`` for a sweep of ``eps``.

    ``u^0`` solves the same problem with the constant harmonic mean; by default
    on the same grid (``reference="fdm"``) so that discretization error largely
    cancels, or from the eigen-expansion (``reference="spectral"``).
    ``J`` defaults to the resolution rule at the smallest ``eps`` and
    ``M`` to ``J``.
    """
    eps = [float(e) for e in epsilons]
    if u0 is None:
        def u0(x):
            return -np.sin(math.pi * x / length)
    if J is None:
        J = int(math.ceil(NODES_PER_PERIOD * length / (min(eps) * a.period)))
    M = J if M is None else M
    grid = TimeGrid(t_final, M)
    a0 = harmonic_mean(a)
    if reference == "fdm":
        ref = fdm_solve(a0, u0, length, grid, J, alpha)
    elif reference == "spectral":
        ref = spectral_solve(IntervalDomain(length), a0, alpha, u0, n_max=64)
    else:
        raise ValueError(f"unknown reference {reference!r}")

    def one(e):
        osc = oscillate(a, e)
        field_e = fdm_solve(osc, u0, length, grid, J, alpha)
        return l2_space_time_distance(field_e, ref)

    dists = list(map_fn(one, eps))
    rows = []
    for i, (e, d) in enumerate(zip(eps, dists)):
        rate = math.nan
        if i > 0 and d > 0 and dists[i - 1] > 0:
            rate = math.log(dists[i - 1] / d) / math.log(eps[i - 1] / e)
        rows.append({"epsilon": e, "distance": d, "rate": rate})
    return rows

