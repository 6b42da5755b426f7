"""Recovery of diffusion coefficients from sparse observations.

The workhorse is :func:`recover_monotone`: under the sign condition on the
initial state (``Laplacian u0 >= 0``) the data map ``p -> h(p)`` is strictly
increasing, so a safeguarded bisection / regula-falsi search inverts it. On
top of that sit the long-time trace fit, the non-uniqueness counterexample and
the two pipelines that connect periodic and homogenized models.
"""

from __future__ import annotations

import csv
import json
import math
import os
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma, rgamma

from fracdiffhom.cell import PeriodicCoefficient1D, harmonic_mean, oscillate, panel_nodes
from fracdiffhom.errors import (
    DegenerateInitialData,
    FamilyNotMonotone,
    MonotonicityViolation,
    NonConvergence,
    ObservationOutOfRange,
    WindowTooEarly,
)
from fracdiffhom.forward import (
    CylinderDomain,
    IntervalDomain,
    Observation,
    Region,
    Trace,
    dirichlet_eigs,
    fdm_solve,
    observe,
    spectral_solve,
    spectral_solve_layered,
)
from fracdiffhom.fracalc import TimeGrid

MAX_ITER = 200


@dataclass(frozen=True)
class ForwardModel:
    """Everything needed to map a coefficient ``p`` to a solution.

    ``kind`` selects the eigen-expansion (``"spectral"``, the default; a
    :class:`CylinderDomain` with ``b`` gives the layered model) or the
    finite-difference solver with a constant coefficient (``"fdm"``, 1D only).
    """

    domain: IntervalDomain | CylinderDomain = IntervalDomain()
    alpha: float = 0.5
    u0: object = (-1.0,)
    b: tuple[float, ...] = ()
    kind: str = "spectral"
    n_max: int = 64
    grid: TimeGrid | None = None
    J: int | None = None

    def solve(self, p: float):
        if self.kind == "fdm":
            if self.grid is None or self.J is None:
                raise ValueError("fdm forward model needs grid and J")
            return fdm_solve(p, self.u0, self.domain.length, self.grid, self.J, self.alpha)
        if isinstance(self.domain, CylinderDomain):
            return spectral_solve_layered(self.domain, p, self.b, self.alpha, self.u0, self.n_max)
        return spectral_solve(self.domain, p, self.alpha, self.u0, self.n_max)


@dataclass(frozen=True)
class RecoverySpec:
    model: ForwardModel
    observation: Observation
    value: float
    nu: float
    mu: float
    tolerance: float = 1e-8

    def __post_init__(self) -> None:
        if not self.nu < self.mu:
            raise ValueError("need nu < mu")
        if not math.isfinite(self.value):
            raise ValueError("observation must be finite")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass
class RecoveryResult:
    p_hat: float
    bracket: tuple[float, float]
    iterations: int
    residual: float
    stability_estimate: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "residual": self.residual,
            "stability_estimate": self.stability_estimate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def forward_data(p: float, spec: RecoverySpec) -> float:
    """``h(p)``: the observation functional applied to the forward solution for ``p``."""
    return float(observe(spec.model.solve(p), spec.observation))


def recover_monotone(spec: RecoverySpec, h: Callable[[float], float] | None = None) -> RecoveryResult:
    """Invert the increasing data map ``h`` on ``[nu, mu]``.

    Alternates regula-falsi and bisection steps inside the bracket, so the
    bracket at least halves every second iteration. Stops once the bracket is
    narrower than ``tolerance * max(1, mu)`` and ``|h(p) - value| <= tolerance``.

    Raises
    ------
    MonotonicityViolation
        If ``h(nu) >= h(mu)``; typically the initial state breaks the sign condition.
    ObservationOutOfRange
        If the observation lies outside ``[h(nu), h(mu)]``.
    """
    if h is None:
        def h(p):
            return forward_data(p, spec)

    target, tol = spec.value, spec.tolerance
    lo, hi = spec.nu, spec.mu
    h_lo, h_hi = h(lo), h(hi)
    if not h_lo < h_hi:
        raise MonotonicityViolation(
            f"h(nu)={h_lo!r} is not below h(mu)={h_hi!r}; data map is not increasing"
        )
    if not h_lo - tol <= target <= h_hi + tol:
        raise ObservationOutOfRange(
            f"observation {target!r} outside attainable range [{h_lo!r}, {h_hi!r}]"
        )
    width_tol = tol * max(1.0, spec.mu)
    history = [(lo, hi, h_lo, h_hi)]
    it = 0
    while not (hi - lo <= width_tol and min(h_hi - target, target - h_lo) <= tol):
        if it >= MAX_ITER:
            raise NonConvergence(f"no convergence in {MAX_ITER} iterations")
        it += 1
        if it % 2 == 1:
            cand = lo + (target - h_lo) * (hi - lo) / (h_hi - h_lo)
            # keep the secant point strictly inside the bracket
            margin = 1e-3 * (hi - lo)
            cand = min(max(cand, lo + margin), hi - margin)
        else:
            cand = 0.5 * (lo + hi)
        h_c = h(cand)
        if h_c <= target:
            lo, h_lo = cand, h_c
        if h_c >= target:
            hi, h_hi = cand, h_c
        history.append((lo, hi, h_lo, h_hi))

    if target - h_lo <= h_hi - target:
        p_hat, residual = lo, target - h_lo
    else:
        p_hat, residual = hi, h_hi - target
    return RecoveryResult(
        p_hat=float(p_hat),
        bracket=(float(lo), float(hi)),
        iterations=it,
        residual=float(abs(residual)),
        stability_estimate=_local_constant(h, p_hat, spec.nu, spec.mu),
        extra={"bracket_history": history},
    )


def _local_constant(h, p: float, nu: float, mu: float) -> float:
    """``1 / h'(p)`` by centered difference, clipped to ``[nu, mu]``."""
    d = 1e-4 * max(1.0, abs(p))
    a, b = max(nu, p - d), min(mu, p + d)
    slope = (h(b) - h(a)) / (b - a)
    return float(1.0 / slope) if slope != 0 else math.inf


# -- long-time trace ---------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticCoefficients:
    """``P_k(x0) = sum_n c_n phi_n(x0) / lambda_n^k`` for ``k = 1..K``."""

    values: np.ndarray
    truncation: int
    tail_ratio: float

    @property
    def K(self) -> int:
        return self.values.size


def asymptotic_coeffs(u0_coeffs, length: float, x0: float, K: int = 4) -> AsymptoticCoefficients:
    """Trace coefficients from the first ``len(u0_coeffs)`` Dirichlet modes on ``(0, L)``.

    ``tail_ratio`` is ``lambda_1 / lambda_{N+1}``, the geometric decay factor of
    the neglected modes.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    c = np.asarray(u0_coeffs, dtype=float).ravel()
    eig = dirichlet_eigs(length, max(1, c.size) + 1)
    lam = eig.values[: c.size]
    phi = eig.basis([x0])[: c.size, 0]
    pv = np.array([np.sum(c * phi / lam**k) for k in range(1, K + 1)])
    return AsymptoticCoefficients(pv, c.size, float(eig.values[0] / eig.values[c.size]))


def _expansion_coeff(alpha: float, k: int) -> float:
    return (-1.0) ** (k + 1) * float(rgamma(1.0 - alpha * k))


def contamination_bound(coeffs: AsymptoticCoefficients, alpha: float, p: float, t: float) -> float:
    """Relative size of the ``k >= 2`` expansion terms against the ``k = 1`` term at ``(p, t)``."""
    lead = abs(_expansion_coeff(alpha, 1) * coeffs.values[0]) / (p * t**alpha)
    rest = sum(
        abs(_expansion_coeff(alpha, k) * coeffs.values[k - 1]) / (p * t**alpha) ** k
        for k in range(2, coeffs.K + 1)
    )
    return float(rest / lead)


def fit_leading_amplitude(times, trace, alpha: float) -> tuple[float, float]:
    """Least-squares ``A`` in ``trace ~ A t^(-alpha)``; returns ``(A, rms residual)``."""
    s = np.asarray(times, dtype=float) ** (-alpha)
    y = np.asarray(trace, dtype=float)
    A = float(np.dot(s, y) / np.dot(s, s))
    return A, float(np.sqrt(np.mean((y - A * s) ** 2)))


def recover_from_trace(
    times,
    trace,
    u0_coeffs,
    x0: float,
    alpha: float,
    length: float = math.pi,
    nu: float = 0.5,
    mu: float = 3.0,
    window: tuple[float, float] | None = None,
    K: int = 4,
    max_contamination: float = 0.1,
    degenerate_tol: float = 1e-10,
) -> RecoveryResult:
    """Recover ``p`` from the long-time tail ``u(x0, t) ~ P_1(x0) / (Gamma(1-a) p t^a)``.

    Fits ``A t^-a`` on the window by linear least squares and returns
    ``p = P_1(x0) / (Gamma(1 - a) A)``. The contamination bound is the size of
    the neglected ``k >= 2`` terms relative to the fitted one at ``p = nu`` and
    the window start.

    Raises
    ------
    DegenerateInitialData
        If ``|P_1(x0)|`` is below ``degenerate_tol``.
    WindowTooEarly
        If the contamination bound exceeds ``max_contamination``.
    """
    times = np.asarray(times, dtype=float)
    trace = np.asarray(trace, dtype=float)
    coeffs = asymptotic_coeffs(u0_coeffs, length, x0, K)
    p1 = coeffs.values[0]
    if abs(p1) < degenerate_tol:
        raise DegenerateInitialData(f"P_1(x0) = {p1!r} vanishes; trace does not identify p")
    if window is None:
        window = (float(times.min()), float(times.max()))
    mask = (times >= window[0]) & (times <= window[1])
    if mask.sum() < 2:
        raise ValueError("fit window holds fewer than two samples")
    bound = contamination_bound(coeffs, alpha, nu, window[0])
    if bound > max_contamination:
        raise WindowTooEarly(
            f"k>=2 terms reach {bound:.3g} of the leading term at t={window[0]}"
        )
    A, rms = fit_leading_amplitude(times[mask], trace[mask], alpha)
    p_hat = p1 / (gamma(1.0 - alpha) * A)
    return RecoveryResult(
        p_hat=float(p_hat),
        bracket=(float(nu), float(mu)),
        iterations=1,
        residual=rms,
        stability_estimate=float(abs(p_hat / A)),
        extra={"amplitude": A, "P": coeffs.values.tolist(), "contamination_bound": bound},
    )


def leading_coefficients_agree(times, trace_p, trace_q, alpha: float, rtol: float = 1e-8) -> bool:
    """Pairwise check: do two traces share the same fitted ``t^-alpha`` amplitude?"""
    a_p, _ = fit_leading_amplitude(times, trace_p, alpha)
    a_q, _ = fit_leading_amplitude(times, trace_q, alpha)
    return bool(abs(a_p - a_q) <= rtol * max(abs(a_p), abs(a_q)))


def counterexample_demo(
    alpha: float = 0.5,
    x0: float = math.pi / 3,
    times=None,
) -> dict:
    """Two different (p, u0) pairs with identical traces at ``x0``.

    ``p = 1, u0 = phi_1`` and ``q = 1/4, u0 = phi_2`` on ``(0, pi)``; at
    ``x0 = pi/3`` both traces equal ``E_{a,1}(-t^a) phi_1(pi/3)`` while the
    first-mode projection of the second initial state vanishes.
    """
    if times is None:
        times = np.linspace(0.1, 10.0, 100)
    times = np.asarray(times, dtype=float)
    dom = IntervalDomain(math.pi)
    up = spectral_solve(dom, 1.0, alpha, [1.0], n_max=2)
    uq = spectral_solve(dom, 0.25, alpha, [0.0, 1.0], n_max=2)
    tp = observe(up, Trace(x0, tuple(times)))
    tq = observe(uq, Trace(x0, tuple(times)))
    p1_q = asymptotic_coeffs([0.0, 1.0], math.pi, x0, 1).values[0]
    proj_q = float(uq.coeffs[0] * dirichlet_eigs(dom, 1).basis([x0])[0, 0])
    return {
        "alpha": alpha,
        "x0": x0,
        "times": times,
        "trace_p": tp,
        "trace_q": tq,
        "max_difference": float(np.max(np.abs(tp - tq))),
        "P1_u0q_at_x0": proj_q,
        "P1_sum_q": float(p1_q),
        "hypothesis_holds": proj_q != 0.0,
    }


# -- cross-structure pipelines ------------------------------------------------


def cross_recover_homogenized(
    a: PeriodicCoefficient1D,
    epsilons: Sequence[float],
    region: Region | None = None,
    alpha: float = 0.5,
    length: float = 1.0,
    t_final: float = 1.0,
    u0=None,
    nu: float | None = None,
    mu: float | None = None,
    J: int | None = None,
    M: int | None = None,
    tolerance: float = 1e-10,
    map_fn=map,
) -> list[dict]:
    """Recover the effective coefficient from region data of the periodic solution.

    For each ``eps`` the oscillating problem is solved by finite differences,
    its region integral is observed, and that number is inverted against the
    constant-coefficient model discretized on the same grid.

    Returns rows ``{epsilon, a0_hat, error}`` with ``error = |a0_hat - a0|``.
    """
    from fracdiffhom.forward import NODES_PER_PERIOD

    eps = [float(e) for e in epsilons]
    if u0 is None:
        def u0(x):
            return -np.sin(math.pi * np.asarray(x) / length)
    if region is None:
        region = Region((0.25 * length, 0.75 * length), (0.5 * t_final, t_final))
    if J is None:
        J = int(math.ceil(NODES_PER_PERIOD * length / (min(eps) * a.period)))
    M = J if M is None else M
    grid = TimeGrid(t_final, M)
    nu = a.nu if nu is None else nu
    mu = a.mu if mu is None else mu
    a0 = harmonic_mean(a)
    model = ForwardModel(IntervalDomain(length), alpha, u0, kind="fdm", grid=grid, J=J)

    def one(e):
        field_e = fdm_solve(oscillate(a, e), u0, length, grid, J, alpha)
        value = float(observe(field_e, region))
        spec = RecoverySpec(model, region, value, nu, mu, tolerance)
        res = recover_monotone(spec)
        return {"epsilon": e, "a0_hat": res.p_hat, "error": abs(res.p_hat - a0),
                "iterations": res.iterations}

    return list(map_fn(one, eps))


def l1_distance(a1: PeriodicCoefficient1D, a2: PeriodicCoefficient1D, quad_points: int = 10_000) -> float:
    bps = sorted(set(a1.breakpoints) | set(a2.breakpoints))
    y, w = panel_nodes(a1.period, bps, quad_points)
    return float(np.dot(w, np.abs(a1(y) - a2(y))))


def sandwich_check(
    a1: PeriodicCoefficient1D, a2: PeriodicCoefficient1D, nu: float, mu: float
) -> dict:
    """Two-sided bound for ordered coefficients ``a1 >= a2``.

    ``nu^2/(mu^2 l) ||a1-a2||_L1 <= a1^0 - a2^0 <= mu^2/(nu^2 l) ||a1-a2||_L1``
    with ``l`` the period.
    """
    ell = a1.period
    d = l1_distance(a1, a2)
    gap = harmonic_mean(a1) - harmonic_mean(a2)
    c_lo = nu**2 / (mu**2 * ell)
    c_hi = mu**2 / (nu**2 * ell)
    return {
        "gap": gap,
        "l1": d,
        "lower_constant": c_lo,
        "upper_constant": c_hi,
        "lower": c_lo * d,
        "upper": c_hi * d,
        "realized_constant": gap / d if d > 0 else math.nan,
        "holds": bool(c_lo * d <= gap * (1 + 1e-12) and gap <= c_hi * d * (1 + 1e-12)),
    }


def cross_recover_periodic(
    family: Callable[[float], PeriodicCoefficient1D],
    s_interval: tuple[float, float],
    spec: RecoverySpec,
    nu: float,
    mu: float,
    s_tol: float = 1e-10,
) -> dict:
    """Recover a member of an ordered family from homogenized-model data.

    ``spec`` describes the observation of the homogenized solution; its
    ``[nu, mu]`` should cover ``a0(s)`` over ``s_interval``. First ``a0`` is
    recovered, then ``s -> harmonic_mean(family(s))`` is inverted by bisection.

    Raises
    ------
    FamilyNotMonotone
        If ``a0(s)`` is not strictly increasing on a 32-point grid.
    """
    s_lo, s_hi = s_interval
    grid = np.linspace(s_lo, s_hi, 32)
    a0_grid = np.array([harmonic_mean(family(s)) for s in grid])
    if not np.all(np.diff(a0_grid) > 0):
        raise FamilyNotMonotone("harmonic mean is not strictly increasing along the family")
    res = recover_monotone(spec)
    a0_hat = res.p_hat

    def g(s):
        return harmonic_mean(family(s))

    inner = RecoverySpec(spec.model, spec.observation, a0_hat, s_lo, s_hi, s_tol)
    s_res = recover_monotone(inner, h=g)
    s_hat = s_res.p_hat
    report = {
        "a0_hat": a0_hat,
        "s_hat": s_hat,
        "a0_iterations": res.iterations,
        "s_iterations": s_res.iterations,
        "lower_constant": nu**2 / (mu**2 * family(s_hat).period),
        "upper_constant": mu**2 / (nu**2 * family(s_hat).period),
        "coefficient": family(s_hat),
    }
    # realized constant against the lower end of the family
    if s_hat > s_lo:
        report["sandwich"] = sandwich_check(family(s_hat), family(s_lo), nu, mu)
    return report


# -- persistence --------------------------------------------------------------


LEDGER_FIELDS = ["p_hat", "bracket_lo", "bracket_hi", "iterations", "residual", "stability_estimate"]


def append_result_csv(result: RecoveryResult, path: str | os.PathLike) -> None:
    """Append one row to a CSV run ledger, writing the header on first use."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(LEDGER_FIELDS)
        w.writerow([
            repr(result.p_hat),
            repr(result.bracket[0]),
            repr(result.bracket[1]),
            result.iterations,
            repr(result.residual),
            repr(result.stability_estimate),
        ])
