"""Config-driven experiment runner.

Usage::

    fracdiffhom homogenize --config scenario.yaml --out results/
    fracdiffhom convergence --config scenario.yaml --out results/ --jobs 4

Each subcommand reads the block with its own name from the YAML file and
writes ``result.json`` (plus ``table.csv`` and ``*.dat`` where relevant) to
``--out``. Every run, failed or not, appends one row to ``ledger.csv``.
The process exits with status 1 exactly when an error report is written.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from fracdiffhom import config as cfg
from fracdiffhom.cell import (
    LayeredMatrix,
    PeriodicCoefficient1D,
    arithmetic_mean,
    corrector_1d,
    harmonic_mean,
    homogenize_layered,
    layered_flux_means,
    oscillate,
)
from fracdiffhom.errors import FracHomError, ResolutionError
from fracdiffhom.forward import (
    NODES_PER_PERIOD,
    Field,
    IntervalDomain,
    Point,
    Region,
    Trace,
    fdm_solve,
    homogenization_study,
    observe,
    spectral_solve,
)
from fracdiffhom.fracalc import TimeGrid
from fracdiffhom.inverse import (
    ForwardModel,
    RecoverySpec,
    append_result_csv,
    counterexample_demo,
    cross_recover_homogenized,
    cross_recover_periodic,
    forward_data,
    recover_from_trace,
    recover_monotone,
    sandwich_check,
)
from fracdiffhom.mlf import ml

LEDGER_HEADER = ["scenario", "timestamp", "subcommand", "input_hash", "status", "key_outputs", "artifacts"]


# -- output helpers -------------------------------------------------------------


def _plain(obj):
    """JSON-safe copy: numpy scalars and arrays become Python objects, NaN becomes null."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Run:
    """Collects artifacts for one invocation."""

    def __init__(self, out: str, subcommand: str, scenario: str = "unknown", digest: str = ""):
        self.out = out
        self.subcommand = subcommand
        self.scenario = scenario
        self.digest = digest
        self.artifacts: list[str] = []
        os.makedirs(out, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.out, name)
        self.artifacts.append(name)
        return p

    def write_json(self, name: str, doc: dict) -> None:
        with open(self.path(name), "w") as fh:
            json.dump(_plain(doc), fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")

    def write_csv(self, name: str, header, rows) -> None:
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])

    def write_dat(self, name: str, columns, comment: str) -> None:
        with open(self.path(name), "w") as fh:
            fh.write(f"# {comment}\n")
            for row in zip(*columns):
                fh.write(" ".join(_fmt(float(v)) for v in row) + "\n")

    def ledger(self, status: str, key_outputs: dict) -> None:
        path = os.path.join(self.out, "ledger.csv")
        new = not os.path.exists(path) or os.path.getsize(path) == 0
        with open(path, "a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(LEDGER_HEADER)
            w.writerow([
                self.scenario,
                datetime.now(timezone.utc).isoformat(timespec="seconds"),
                self.subcommand,
                self.digest,
                status,
                json.dumps(_plain(key_outputs), sort_keys=True),
                ";".join(self.artifacts),
            ])


def _mapper(jobs: int):
    if jobs <= 1:
        return map, None
    pool = ThreadPoolExecutor(max_workers=jobs)
    return pool.map, pool


def _u0_callable(coeffs, length: float):
    coeffs = np.asarray(coeffs, dtype=float)
    k = np.arange(1, coeffs.size + 1)

    def u0(x):
        x = np.asarray(x, dtype=float)
        phi = math.sqrt(2.0 / length) * np.sin(np.multiply.outer(x, k) * math.pi / length)
        return phi @ coeffs

    return u0


# -- subcommands ----------------------------------------------------------------


def cmd_homogenize(block: dict, run: Run, base_dir: str, jobs: int) -> dict:
    if block["coefficient"] is not None:
        a = cfg.build_coefficient(block["coefficient"], base_dir)
        A = LayeredMatrix([[a]], a.nu, a.mu, a.period)
        a0 = harmonic_mean(a, block["quad_points"])
        corr = corrector_1d(a, 1001)
        run.write_dat("corrector.dat", (corr.y, corr.chi), "y chi(y)")
        extra = {"a0": a0, "arithmetic_mean": arithmetic_mean(a, block["quad_points"])}
    else:
        A = cfg.build_layered(block["layered"], base_dir)
        extra = {}
    tensor = homogenize_layered(A, block["quad_points"])
    definition = layered_flux_means(A, block["grid_points"])
    result = {
        "tensor": tensor.matrix,
        "definition_check": definition,
        "discrepancy": float(np.max(np.abs(definition - tensor.matrix))),
        "eigenvalues": tensor.eigenvalues(),
        "symmetric": tensor.is_symmetric(),
        "elliptic": tensor.is_elliptic(),
        "nu": A.nu,
        "mu": A.mu,
        **extra,
    }
    print(f"A0 = {np.array2string(tensor.matrix, precision=10)}")
    print(f"definition discrepancy = {result['discrepancy']:.3e}")
    return result


def _sweep_grid(block: dict, a: PeriodicCoefficient1D) -> int:
    need = NODES_PER_PERIOD * block["length"] / (min(block["epsilons"]) * a.period)
    J = block["J"]
    if J is None:
        return int(math.ceil(need))
    if J < need:
        raise ResolutionError(
            f"J={J} below the resolution rule J >= {math.ceil(need)} at eps={min(block['epsilons'])}"
        )
    return J


def cmd_convergence(block: dict, run: Run, base_dir: str, jobs: int) -> dict:
    a = cfg.build_coefficient(block["coefficient"], base_dir)
    J = _sweep_grid(block, a)
    M = J if block["M"] is None else block["M"]
    map_fn, pool = _mapper(jobs)
    try:
        rows = homogenization_study(
            a, block["epsilons"], alpha=block["alpha"], length=block["length"],
            t_final=block["t_final"], J=J, M=M, reference=block["reference"], map_fn=map_fn,
        )
    finally:
        if pool is not None:
            pool.shutdown()
    run.write_csv("table.csv", ["epsilon", "distance", "rate"],
                  [(r["epsilon"], r["distance"], r["rate"]) for r in rows])
    run.write_dat("convergence.dat", ([r["epsilon"] for r in rows], [r["distance"] for r in rows]),
                  "epsilon distance")
    d = [r["distance"] for r in rows]
    for r in rows:
        print(f"eps={r['epsilon']:<10.6g} distance={r['distance']:.6e} rate={r['rate']:.3f}")
    return {
        "rows": rows,
        "J": J,
        "M": M,
        "a0": harmonic_mean(a),
        "strictly_decreasing": all(x > y for x, y in zip(d, d[1:])),
    }


def cmd_solve(block: dict, run: Run, base_dir: str, jobs: int) -> dict:
    L, T = block["length"], block["t_final"]
    grid = TimeGrid(T, block["steps"])
    if block["method"] == "spectral":
        sol = spectral_solve(
            IntervalDomain(L), block["p"], block["alpha"], block["u0_coeffs"], block["n_max"]
        )
        with open(run.path("solution.json"), "w") as fh:
            fh.write(sol.to_json() + "\n")
        x = np.linspace(0.0, L, block["nx"])
        field = Field(x, grid, sol.evaluate(x, grid.nodes))
        info = {"tail_bound": sol.tail_bound, "n_modes": sol.n_modes}
    else:
        if block["coefficient"] is not None:
            a = cfg.build_coefficient(block["coefficient"], base_dir)
            if block["epsilon"] is not None:
                a = oscillate(a, block["epsilon"])
        else:
            a = block["p"]
        u0 = _u0_callable(block["u0_coeffs"], L)
        field = fdm_solve(a, u0, L, grid, block["J"], block["alpha"])
        info = {"J": block["J"]}
    field.to_csv(run.path("field.csv"))
    run.write_dat("final_profile.dat", (field.x, field.values[-1]), f"x u(x, {T!r})")
    mid = field.values[:, field.x.size // 2]
    run.write_dat("midpoint_trace.dat", (field.t, mid), "t u(L/2, t)")
    print(f"{block['method']} solve: max|u| = {np.max(np.abs(field.values)):.6e}")
    return {"method": block["method"], "max_abs": float(np.max(np.abs(field.values))),
            "final_midpoint": float(mid[-1]), **info}


def cmd_invert(block: dict, run: Run, base_dir: str, jobs: int) -> dict:
    mode, L, alpha = block["mode"], block["length"], block["alpha"]
    if mode == "counterexample":
        demo = counterexample_demo(alpha=alpha)
        run.write_csv("traces.csv", ["t", "trace_p", "trace_q"],
                      zip(demo["times"], demo["trace_p"], demo["trace_q"]))
        print(f"max trace difference = {demo['max_difference']:.3e}; "
              f"P1 u0q(x0) = {demo['P1_u0q_at_x0']!r}")
        return {k: demo[k] for k in ("alpha", "x0", "max_difference", "P1_u0q_at_x0", "hypothesis_holds")}

    coeffs = block["u0_coeffs"]
    if mode == "trace":
        times = np.linspace(*block["window"], block["n_times"])
        sol = spectral_solve(IntervalDomain(L), block["p_true"], alpha, coeffs)
        trace = observe(sol, Trace(block["x0"], tuple(times)))
        res = recover_from_trace(times, trace, coeffs, block["x0"], alpha, L, block["nu"], block["mu"],
                                 window=tuple(block["window"]))
        run.write_csv("table.csv", ["t", "trace"], zip(times, trace))
    else:
        model = ForwardModel(IntervalDomain(L), alpha, tuple(coeffs))
        if mode == "point":
            obs = Point(block["x0"], block["t0"])
        else:
            obs = Region(tuple(block["omega"]), tuple(block["interval"]))
        spec = RecoverySpec(model, obs, 0.0, block["nu"], block["mu"], block["tolerance"])
        value = block["observation"]
        if value is None:
            value = forward_data(block["p_true"], spec)
        spec = RecoverySpec(model, obs, float(value), block["nu"], block["mu"], block["tolerance"])
        res = recover_monotone(spec)
    append_result_csv(res, run.path("recoveries.csv"))
    out = {"mode": mode, **res.to_dict(), "observation": block["observation"]}
    if block["observation"] is None:
        out["p_true"] = block["p_true"]
        out["error"] = abs(res.p_hat - block["p_true"])
    if mode == "trace":
        out["contamination_bound"] = res.extra["contamination_bound"]
    print(f"p_hat = {res.p_hat!r} after {res.iterations} iteration(s)")
    return out


def _family(kind: str, amplitude: float):
    if kind == "identity":
        return lambda s: PeriodicCoefficient1D.constant(s)
    if kind == "sinusoid_shift":
        return lambda s: PeriodicCoefficient1D.sinusoid(s, amplitude)
    raise cfg.ConfigError(f"cross.family.kind: expected 'identity' or 'sinusoid_shift', got {kind!r}")


def cmd_cross(block: dict, run: Run, base_dir: str, jobs: int) -> dict:
    L, T = block["length"], block["t_final"]
    if block["mode"] == "to_homogenized":
        a = cfg.build_coefficient(block["coefficient"], base_dir)
        J = _sweep_grid(block, a)
        region = None
        if block["omega"] is not None or block["interval"] is not None:
            region = Region(tuple(block["omega"] or (0.25 * L, 0.75 * L)),
                            tuple(block["interval"] or (0.5 * T, T)))
        map_fn, pool = _mapper(jobs)
        try:
            rows = cross_recover_homogenized(
                a, block["epsilons"], region=region, alpha=block["alpha"], length=L, t_final=T,
                nu=block["nu"], mu=block["mu"], J=J, M=block["M"], tolerance=block["tolerance"],
                map_fn=map_fn,
            )
        finally:
            if pool is not None:
                pool.shutdown()
        run.write_csv("table.csv", ["epsilon", "a0_hat", "error"],
                      [(r["epsilon"], r["a0_hat"], r["error"]) for r in rows])
        run.write_dat("cross.dat", ([r["epsilon"] for r in rows], [r["error"] for r in rows]),
                      "epsilon |a0_hat - a0|")
        for r in rows:
            print(f"eps={r['epsilon']:<10.6g} a0_hat={r['a0_hat']!r} error={r['error']:.3e}")
        return {"mode": "to_homogenized", "rows": rows, "a0": harmonic_mean(a), "J": J}

    fam_cfg = block["family"]
    family = _family(fam_cfg.get("kind"), float(fam_cfg.get("amplitude", 1.0)))
    s_lo, s_hi = block["s_interval"]
    nu = block["nu"] if block["nu"] is not None else family(s_lo).nu
    mu = block["mu"] if block["mu"] is not None else family(s_hi).mu
    x0 = block["x0"] if block["x0"] is not None else 0.5 * L
    model = ForwardModel(IntervalDomain(L), block["alpha"], (-1.0,))
    obs = Point(x0, block["t0"])
    a0_true = harmonic_mean(family(block["s_true"]))
    probe = RecoverySpec(model, obs, 0.0, nu, mu, block["tolerance"])
    spec = RecoverySpec(model, obs, forward_data(a0_true, probe), nu, mu, block["tolerance"])
    rep = cross_recover_periodic(family, (s_lo, s_hi), spec, nu, mu)
    band = sandwich_check(family(s_hi), family(s_lo), nu, mu)
    print(f"a0_hat = {rep['a0_hat']!r}, s_hat = {rep['s_hat']!r}; sandwich holds: {band['holds']}")
    return {
        "mode": "to_periodic",
        "a0_hat": rep["a0_hat"],
        "s_hat": rep["s_hat"],
        "s_true": block["s_true"],
        "s_error": abs(rep["s_hat"] - block["s_true"]),
        "sandwich": band,
    }


def cmd_mlf_table(args) -> int:
    z = np.linspace(args.zmin, args.zmax, args.n)
    vals = ml(z, args.alpha, args.beta)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["z", "value"])
    for zi, v in zip(z, np.atleast_1d(vals)):
        w.writerow([repr(float(zi)), repr(float(v))])
    return 0


COMMANDS = {
    "homogenize": cmd_homogenize,
    "convergence": cmd_convergence,
    "solve": cmd_solve,
    "invert": cmd_invert,
    "cross": cmd_cross,
}

KEY_OUTPUTS = {
    "homogenize": ("tensor", "discrepancy"),
    "convergence": ("strictly_decreasing", "J"),
    "solve": ("max_abs", "final_midpoint"),
    "invert": ("p_hat", "iterations", "max_difference"),
    "cross": ("a0_hat", "s_hat", "a0"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracdiffhom", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=".")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p = sub.add_parser("mlf-table", help=argparse.SUPPRESS)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--zmin", type=float, default=-10.0)
    p.add_argument("--zmax", type=float, default=0.0)
    p.add_argument("--n", type=int, default=11)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "mlf-table":
        return cmd_mlf_table(args)
    run = Run(args.out, args.command)
    try:
        doc = cfg.load(args.config)
        run.scenario = str(doc.get("scenario", "default"))
        norm = cfg.normalize(doc, args.command)
        run.scenario = norm["scenario"]
        run.digest = cfg.input_hash(norm)
        result = COMMANDS[args.command](norm[args.command], run, norm.get("base_dir", "."), max(1, args.jobs))
    except (FracHomError, ValueError, ArithmeticError) as exc:
        report = {
            "status": "error",
            "subcommand": args.command,
            "scenario": run.scenario,
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        run.write_json("result.json", report)
        run.ledger("error", report["error"])
        print(f"error [{run.scenario}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    doc = {"status": "ok", "subcommand": args.command, "scenario": run.scenario,
           "input_hash": run.digest, "result": result}
    run.write_json("result.json", doc)
    run.ledger("ok", {k: result[k] for k in KEY_OUTPUTS[args.command] if k in result})
    return 0


if __name__ == "__main__":
    sys.exit(main())
