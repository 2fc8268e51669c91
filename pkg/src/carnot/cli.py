"""Command-line front door.

Subcommands: group {validate,info}, gradient, residual, lipschitz,
characteristics, broadstar, area, mollify, cone, suite.  Structured output
is JSON (sorted keys, no timestamps) so identical configs and seeds yield
byte-identical reports; curves are CSV.  Exit codes: 0 success, 1
validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile

import numpy as np

from . import area as area_mod
from . import calculus, characteristics, cones, mollify, splitting
from . import group as gp
from .errors import NumericalError, ValidationError
from .functions import load_graph_function, load_vector_field
from .quadrature import QuadratureGrid


def _write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".carnot-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _jsonable(obj):
    """Plain-python, valid-JSON view of a report (no NaN/Infinity literals)."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def _emit(report, args):
    report = _jsonable(report)
    text = json.dumps(report, indent=2, sort_keys=True)
    if getattr(args, "out", None):
        _write_atomic(args.out, text + "\n")
    if getattr(args, "json", False):
        print(text)
    else:
        for key, value in sorted(report.items()):
            print(f"{key}: {value}")


def _parse_floats(text):
    return np.array([float(tok) for tok in text.replace(";", ",").split(",") if tok])


def cmd_group(args):
    G = gp.load_group(args.file)
    report = {
        "m": G.m,
        "n": G.n,
        "homogeneous_dimension": G.homogeneous_dimension,
        "epsilon": G.epsilon,
        "valid": True,
    }
    if args.action == "info":
        report["B"] = [G.B[s].tolist() for s in range(G.n)]
        report["b_max"] = G.b_max
    _emit(report, args)
    return 0


def cmd_gradient(args):
    G = gp.load_group(args.group)
    phi = load_graph_function(args.phi, G)
    a = _parse_floats(args.at)
    w = calculus.intrinsic_gradient(G, phi, a)
    _emit({"at": a.tolist(), "gradient": np.atleast_1d(w).tolist(),
           "seed": args.seed}, args)
    return 0


def cmd_residual(args):
    G = gp.load_group(args.group)
    phi = load_graph_function(args.phi, G)
    w = load_vector_field(args.w, G)
    vals = _parse_floats(args.zeta)
    zeta = calculus.TestFunction(vals[:-1], vals[-1])
    grid = QuadratureGrid(phi.domain.lo, phi.domain.hi,
                          (args.grid,) * phi.domain.dim)
    res = calculus.distributional_residual(G, phi, w, zeta, grid=grid)
    _emit({"residual": res.tolist(), "grid": args.grid, "seed": args.seed}, args)
    return 0


def cmd_lipschitz(args):
    G = gp.load_group(args.group)
    phi = load_graph_function(args.phi, G)
    est = splitting.estimate_intrinsic_lipschitz(G, phi, pair_samples=args.pairs,
                                                 seed=args.seed)
    _emit({"lipschitz_estimate": est, "pairs": args.pairs, "seed": args.seed}, args)
    return 0


def _integrate_curve(G, phi, args):
    a0 = _parse_floats(getattr(args, "from"))
    return characteristics.integrate_characteristic(G, phi, args.j, a0,
                                                    args.T, args.steps)


def cmd_characteristics(args):
    G = gp.load_group(args.group)
    phi = load_graph_function(args.phi, G)
    curve = _integrate_curve(G, phi, args)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"gamma_{s}" for s in range(1, G.n + 1)]
                            + ["phi"])
            for i, t in enumerate(curve.t_grid):
                writer.writerow([f"{t:.17g}"]
                                + [f"{v:.17g}" for v in curve.gamma[i]]
                                + [f"{curve.phi_along[i]:.17g}"])
    report = {
        "steps": len(curve.t_grid) - 1,
        "step": curve.step,
        "error_estimate": curve.error_estimate,
        "truncated": curve.truncated,
        "exit_time": curve.exit_time,
        "seed": args.seed,
    }
    out_path, args.out = args.out, None      # CSV already written
    if out_path:
        report["curve_csv"] = out_path
    _emit(report, args)
    return 0


def cmd_broadstar(args):
    G = gp.load_group(args.group)
    phi = load_graph_function(args.phi, G)
    w = load_vector_field(args.w, G)
    curve = _integrate_curve(G, phi, args)
    w_j = w.components[args.j - 2].eval_extended
    res = characteristics.broadstar_residual(curve, phi, w_j)
    _emit({"broadstar_residual": res, "j": args.j,
           "integrator_error_estimate": curve.error_estimate,
           "seed": args.seed}, args)
    return 0


def cmd_area(args):
    G = gp.load_group(args.group)
    phi = load_graph_function(args.phi, G)
    report = area_mod.area_report(G, phi, points_per_axis=args.grid)
    report["seed"] = args.seed
    _emit(report, args)
    return 0


def cmd_mollify(args):
    G = gp.load_group(args.group)
    phi = load_graph_function(args.phi, G)
    alphas = [float(t) for t in args.alphas.split(",") if t]
    report = mollify.approximation_report(G, phi, alphas, c_level=args.c,
                                          grid_per_axis=args.grid)
    report["seed"] = args.seed
    _emit(report, args)
    return 0


def cmd_cone(args):
    G = gp.load_group(args.group)
    phi = load_graph_function(args.phi, G)
    w_sup = float(np.max(np.linalg.norm(
        calculus.intrinsic_gradient(G, phi, phi.domain.sample(
            2048, np.random.default_rng(args.seed))), axis=-1)))
    k = args.k if args.k is not None else 1.0 / np.sqrt(1.0 + w_sup ** 2)
    b12 = max(G.b_max, 1e-12)
    beta = cones.beta_for_k(k, G.epsilon, b12)
    report = cones.check_cone_containment(G, phi, beta, samples=args.samples,
                                          seed=args.seed)
    report.update({"k": float(k), "seed": args.seed,
                   "gradient_sup_measured": w_sup})
    _emit(report, args)
    return 0


def cmd_suite(args):
    with open(args.config) as fh:
        config = json.load(fh)
    scenarios = config.get("scenarios", [])
    rows = []
    failed = 0
    for scn in scenarios:
        name = scn.get("name", scn.get("command", "?"))
        argv = [scn["command"], *scn.get("args", [])]
        buffer = _CaptureReport()
        code = main(argv + ["--json"], report_sink=buffer)
        ok = code == 0
        checks = scn.get("expect", {})
        for key, rule in checks.items():
            got = buffer.report.get(key) if buffer.report else None
            if got is None:
                ok = False
                continue
            tol = float(rule.get("tol", 0.0))
            if abs(float(got) - float(rule["value"])) > tol:
                ok = False
        rows.append({"name": name, "pass": ok})
        failed += 0 if ok else 1
    table = {"rows": rows, "failed": failed, "seed": args.seed}
    text = json.dumps(table, indent=2, sort_keys=True)
    if args.out:
        _write_atomic(args.out, text + "\n")
    if args.json:
        print(text)
    else:
        width = max([4] + [len(r["name"]) for r in rows])
        for r in rows:
            print(f"{r['name']:<{width}}  {'PASS' if r['pass'] else 'FAIL'}")
        print(f"{failed} failing of {len(rows)}")
    return 0 if failed == 0 else 1


class _CaptureReport:
    def __init__(self):
        self.report = None


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=1,
                     help="accepted for interface compatibility; "
                          "computation is vectorized, not threaded")
    sub.add_argument("--out", default=None)
    sub.add_argument("--json", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="carnot",
        description="numerics for step-2 Carnot groups and intrinsic graphs")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("group", help="validate or describe a group file")
    p.add_argument("action", choices=["validate", "info"])
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(fn=cmd_group)

    p = subs.add_parser("gradient", help="intrinsic gradient at a base point")
    p.add_argument("--group", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--at", required=True, help="comma-separated base point")
    _add_common(p)
    p.set_defaults(fn=cmd_gradient)

    p = subs.add_parser("residual", help="distributional residual of D phi = w")
    p.add_argument("--group", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--zeta", required=True,
                   help="bump spec: center coordinates then radius")
    p.add_argument("--grid", type=int, default=64)
    _add_common(p)
    p.set_defaults(fn=cmd_residual)

    p = subs.add_parser("lipschitz", help="intrinsic Lipschitz estimate")
    p.add_argument("--group", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--pairs", type=int, default=10_000)
    _add_common(p)
    p.set_defaults(fn=cmd_lipschitz)

    for name, fn in [("characteristics", cmd_characteristics),
                     ("broadstar", cmd_broadstar)]:
        p = subs.add_parser(name)
        p.add_argument("--group", required=True)
        p.add_argument("--phi", required=True)
        if name == "broadstar":
            p.add_argument("--w", required=True)
        p.add_argument("--j", type=int, default=2)
        p.add_argument("--from", required=True, dest="from",
                       help="comma-separated start base point")
        p.add_argument("--T", type=float, default=1.0)
        p.add_argument("--steps", type=int, default=1000)
        _add_common(p)
        p.set_defaults(fn=fn)

    p = subs.add_parser("area", help="graph area integral with order estimate")
    p.add_argument("--group", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--grid", type=int, default=64)
    _add_common(p)
    p.set_defaults(fn=cmd_area)

    p = subs.add_parser("mollify", help="smoothing pipeline convergence report")
    p.add_argument("--group", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--alphas", default="0.2,0.1,0.05")
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--grid", type=int, default=32)
    _add_common(p)
    p.set_defaults(fn=cmd_mollify)

    p = subs.add_parser("cone", help="cone-containment sweep")
    p.add_argument("--group", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--samples", type=int, default=10_000)
    _add_common(p)
    p.set_defaults(fn=cmd_cone)

    p = subs.add_parser("suite", help="run a scenario suite from a config file")
    p.add_argument("config")
    _add_common(p)
    p.set_defaults(fn=cmd_suite)
    return parser


def main(argv=None, report_sink=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if report_sink is not None:
        # reroute _emit for suite-internal scenario runs
        global _emit
        original = _emit

        def capture(report, a):
            report_sink.report = report

        _emit = capture
        try:
            return _dispatch(args)
        finally:
            _emit = original
    return _dispatch(args)


def _dispatch(args):
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (KeyError, json.JSONDecodeError) as exc:
        print(f"error: invalid input file ({exc})", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
