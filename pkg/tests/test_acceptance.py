"""Acceptance gate: criteria 1-10 at their stated tolerances and runtime budgets.

Each ``criterion_N`` returns ``(passed, detail)``; the pytest wrappers time it,
print one ``PASS``/``FAIL`` line and assert. Run standalone with
``python3 tests/test_acceptance.py`` for the summary only.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from scipy.special import erfcx, gamma

from fracdiffhom.cell import (
    LayeredMatrix,
    PeriodicCoefficient1D,
    harmonic_mean,
    homogenize_layered,
    verify_against_definition,
)
from fracdiffhom.forward import (
    CylinderDomain,
    IntervalDomain,
    Point,
    Trace,
    eigenvalue_ordering_holds,
    fdm_solve,
    homogenization_study,
    layered_rates,
    observe,
    spectral_solve,
)
from fracdiffhom.fracalc import TimeGrid, caputo_l1
from fracdiffhom.inverse import (
    ForwardModel,
    RecoverySpec,
    counterexample_demo,
    forward_data,
    recover_from_trace,
    recover_monotone,
    sandwich_check,
)
from fracdiffhom.mlf import ml


def neg_sine(x):
    return -np.sin(np.asarray(x, dtype=float))


def criterion_1():
    z = np.linspace(-30.0, 0.0, 1000)
    exp_err = float(np.max(np.abs(ml(z, 1.0) - np.exp(z)) / np.exp(z)))
    x = np.linspace(0.1, 6.0, 1000)
    # E_{1/2}(-x) = e^{x^2} erfc(x), and the same identity at -x^2
    rel_x = float(np.max(np.abs(ml(-x, 0.5) / erfcx(x) - 1.0)))
    rel_x2 = float(np.max(np.abs(ml(-(x**2), 0.5) / erfcx(x**2) - 1.0)))
    ok = exp_err <= 1e-12 and rel_x <= 1e-10 and rel_x2 <= 1e-10
    return ok, f"exp rel {exp_err:.2e}; erfc rel {rel_x:.2e} (-x), {rel_x2:.2e} (-x^2)"


def criterion_2():
    orders = {}
    for alpha in (0.3, 0.5, 0.7):
        errs = []
        for M in (64, 128, 256, 512):
            g = TimeGrid(1.0, M)
            exact = 2.0 * g.nodes ** (2.0 - alpha) / gamma(3.0 - alpha)
            errs.append(np.max(np.abs(caputo_l1(g.nodes**2, g, alpha) - exact)))
        orders[alpha] = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    ok = all(np.all(np.abs(o - (2.0 - a)) <= 0.15) for a, o in orders.items())
    detail = "; ".join(f"a={a}: " + ",".join(f"{v:.3f}" for v in o) for a, o in orders.items())
    return ok, detail


def criterion_3():
    a = PeriodicCoefficient1D.sinusoid(2.0, 1.0)
    err_smooth = abs(harmonic_mean(a, 10_000) - math.sqrt(3.0))
    err_lam = abs(harmonic_mean(PeriodicCoefficient1D.two_phase((1.0, 3.0), 0.5)) - 1.5)
    A = LayeredMatrix([[a]], a.nu, a.mu)
    disc = verify_against_definition(A, homogenize_layered(A), 10_000)
    ok = err_smooth <= 1e-9 and err_lam <= 1e-12 and disc < 1e-6
    return ok, f"|a0-sqrt3| {err_smooth:.2e}; |a0-1.5| {err_lam:.2e}; definition {disc:.2e}"


def criterion_4():
    a = PeriodicCoefficient1D.sinusoid(2.0, 1.0)
    rows = homogenization_study(a, [1 / 4, 1 / 8, 1 / 16, 1 / 32], alpha=0.5, length=1.0)
    d = [r["distance"] for r in rows]
    ok = all(x > y for x, y in zip(d, d[1:])) and d[-1] < 0.5 * d[0]
    return ok, "errors " + ", ".join(f"{v:.3e}" for v in d)


def criterion_5():
    x = np.linspace(0.0, math.pi, 100)
    t = np.linspace(0.0, 1.0, 100)
    dom = IntervalDomain(math.pi)
    sp = spectral_solve(dom, 2.0, 0.5, neg_sine)(x, t) - spectral_solve(dom, 1.0, 0.5, neg_sine)(x, t)
    g = TimeGrid(1.0, 99)
    fd = (fdm_solve(2.0, neg_sine, math.pi, g, 99, 0.5).values
          - fdm_solve(1.0, neg_sine, math.pi, g, 99, 0.5).values)
    ok = sp.shape == fd.shape == (100, 100) and sp.min() >= -1e-8 and fd.min() >= -1e-8
    return ok, f"min(u_p - u_q): spectral {sp.min():.2e}, fdm {fd.min():.2e}"


def criterion_6():
    model = ForwardModel(IntervalDomain(math.pi), 0.5, (-1.0,))
    obs = Point(math.pi / 2, 1.0)
    probe = RecoverySpec(model, obs, 0.0, 0.5, 3.0, 1e-8)
    worst_err, worst_it = 0.0, 0
    for p in np.linspace(0.55, 2.95, 16):
        spec = RecoverySpec(model, obs, forward_data(p, probe), 0.5, 3.0, 1e-8)
        res = recover_monotone(spec)
        worst_err = max(worst_err, abs(res.p_hat - p))
        worst_it = max(worst_it, res.iterations)
    ok = worst_err <= 1e-6 and worst_it <= 60
    return ok, f"worst |p_hat-p*| {worst_err:.2e}; max iterations {worst_it}"


def criterion_7():
    out = counterexample_demo(alpha=0.5, x0=math.pi / 3)
    ok = (
        out["times"].size == 100
        and out["max_difference"] <= 1e-12
        and out["P1_u0q_at_x0"] == 0.0
        and not out["hypothesis_holds"]
    )
    return ok, (f"max trace difference {out['max_difference']:.2e}; "
                f"P1 u0q(x0) = {out['P1_u0q_at_x0']}; hypothesis holds: {out['hypothesis_holds']}")


def criterion_8():
    p_true, x0 = 1.3, math.pi / 2
    times = np.linspace(50.0, 500.0, 200)
    sol = spectral_solve(IntervalDomain(math.pi), p_true, 0.5, [-1.0])
    trace = observe(sol, Trace(x0, tuple(times)))
    res = recover_from_trace(times, trace, [-1.0], x0, 0.5, window=(50.0, 500.0))
    rel = abs(res.p_hat - p_true) / p_true
    bound = res.extra["contamination_bound"]
    ok = rel <= 0.02 and bound > rel
    return ok, f"p_hat {res.p_hat:.6f}; rel error {rel:.2e}; contamination bound {bound:.3g}"


def criterion_9():
    a3 = PeriodicCoefficient1D.sinusoid(3.0, 1.0)
    a2 = PeriodicCoefficient1D.sinusoid(2.0, 1.0)
    nu, mu = a2.nu, a3.mu
    out = sandwich_check(a3, a2, nu, mu)
    ok = out["holds"] and out["lower"] <= out["gap"] <= out["upper"]
    return ok, (f"{out['lower']:.4g} <= gap {out['gap']:.10f} <= {out['upper']:.4g} "
                f"(nu={nu}, mu={mu}, constants {out['lower_constant']:.4g}, "
                f"{out['upper_constant']:.4g}, ||da||_L1 {out['l1']:.6f})")


def criterion_10():
    dom = CylinderDomain(math.pi, (math.pi,))
    parts = []
    ok = True
    for p in (1.5, 2.0, 3.0):
        holds = eigenvalue_ordering_holds(dom, p, (1.0,), 32)
        rates, _ = layered_rates(dom, p, (1.0,), 32)
        gap = float(np.min(np.delete(rates.ravel(), 0)) - rates.flat[0])
        ok = ok and holds and rates.shape == (32, 32)
        parts.append(f"p={p}: gap {gap:.3g}")
    return ok, "; ".join(parts)


CRITERIA = {
    1: (criterion_1, 5.0),
    2: (criterion_2, 10.0),
    3: (criterion_3, 2.0),
    4: (criterion_4, 600.0),
    5: (criterion_5, None),
    6: (criterion_6, 30.0),
    7: (criterion_7, 1.0),
    8: (criterion_8, 5.0),
    9: (criterion_9, 2.0),
    10: (criterion_10, None),
}


def evaluate(n: int) -> tuple[bool, str]:
    fn, budget = CRITERIA[n]
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    in_time = budget is None or elapsed < budget
    limit = f" (budget {budget:g} s)" if budget is not None else ""
    line = f"ACCEPTANCE {n:2d} {'PASS' if ok and in_time else 'FAIL'}  {elapsed:7.2f} s{limit}  {detail}"
    return ok and in_time, line


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    ok, line = evaluate(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    for n in sorted(CRITERIA):
        print(evaluate(n)[1])
