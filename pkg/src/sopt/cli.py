"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import bench as _bench
from .color import Image, color_adapt
from .core import NONE, CostSpec, ValidationError
from .io import (points_csv, read_cloud, read_image_file, read_points,
                 write_image_file)
from .registration import RegistrationConfig, Transform, register, transform_error
from .sliced import sopt_estimate
from .solver import SolverConfig, solve, verify_optimality

EXIT_OK, EXIT_VERIFY, EXIT_INPUT = 0, 1, 2


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _emit_json(obj, path=None):
    text = json.dumps(obj, indent=2)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def opt1d_result(x_raw, y_raw, lam, p=2.0, verify=False, pot_penalty=None):
    """Solve on unsorted inputs; report everything in the original index order.

    Returns ``(payload, report)`` where ``report`` is ``None`` unless
    ``verify`` is set.
    """
    x_raw = np.asarray(x_raw, dtype=float)
    y_raw = np.asarray(y_raw, dtype=float)
    px = np.argsort(x_raw, kind="stable")
    py = np.argsort(y_raw, kind="stable")
    xs, ys = x_raw[px], y_raw[py]
    cost = CostSpec(p)
    if pot_penalty is None:
        cfg = SolverConfig(lam=lam, cost=cost)
    else:
        cfg = SolverConfig.pot(pot_penalty, cost=cost)
    sol = solve(xs, ys, cfg)
    L = sol.assignment
    dom = np.flatnonzero(L != NONE)
    matches = sorted([int(px[i]), int(py[L[i]])] for i in dom)
    destroyed = sorted(int(px[i]) for i in np.flatnonzero(L == NONE))
    phi = np.empty_like(sol.duals.phi)
    psi = np.empty_like(sol.duals.psi)
    phi[px] = sol.duals.phi
    psi[py] = sol.duals.psi
    payload = {"value": sol.value, "matches": matches, "destroyed": destroyed,
               "phi": phi.tolist(), "psi": psi.tolist()}
    report = None
    if verify:
        report = verify_optimality(xs, ys, sol, cfg.lam, cost,
                                   penalty=cfg.pot_penalty)
        payload["verified"] = report.ok
    return payload, report


def cmd_opt1d(args):
    x = read_points(args.file_x)
    y = read_points(args.file_y)
    payload, report = opt1d_result(x, y, args.lam, args.p, args.verify, args.pot)
    _emit_json(payload, args.out)
    if report is not None and not report.ok:
        print(str(report), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_bench(args):
    def progress(rec):
        if args.verbose:
            print(f"{rec.generator} n={rec.n} lam={rec.lam:g} r={rec.repeat} "
                  f"{rec.time_s:.4f}s {rec.status}", file=sys.stderr)

    records = _bench.run_bench(args.generator, _ints(args.sizes),
                               _floats(args.lams) if args.lams else None,
                               args.repeats, args.seed, args.extra_targets, progress)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            _bench.write_csv(records, fh)
    else:
        _bench.write_csv(records, sys.stdout)
    if args.slope:
        for lam in sorted({r.lam for r in records}):
            print(f"lam={lam:g} slope={_bench.loglog_slope(records, lam):.3f}",
                  file=sys.stderr)
    return EXIT_OK


def _check_dim(P, d, path):
    if d is not None and P.shape[1] != d:
        raise ValidationError(f"{path}: expected dimension {d}, got {P.shape[1]}")


def cmd_sopt(args):
    X = read_cloud(args.file_x, args.dim)
    Y = read_cloud(args.file_y, args.dim)
    _check_dim(X, args.dim, args.file_x)
    _check_dim(Y, args.dim, args.file_y)
    est = sopt_estimate(X, Y, args.lam, N=args.N, seed=args.seed,
                        cost=CostSpec(args.p), workers=args.workers)
    print(json.dumps({"value": est.value, "metric": est.metric(), "N": args.N,
                      "seed": args.seed}))
    if args.slices:
        with open(args.slices, "w", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["slice"] + [f"theta{k}" for k in range(X.shape[1])] + ["value"])
            for l, (theta, v) in enumerate(zip(est.directions.directions,
                                               est.per_slice)):
                w.writerow([l, *map(repr, theta.tolist()), repr(float(v))])
    return EXIT_OK


def cmd_register(args):
    X = read_cloud(args.file_x)
    Y = read_cloud(args.file_y)
    cfg = RegistrationConfig(n0=args.n0 if args.n0 is not None else X.shape[0],
                             N=args.N, lam0=args.lam0, seed=args.seed,
                             cost=CostSpec(args.p))
    res = register(X, Y, cfg)
    out = res.transform.to_dict()
    if args.truth:
        with open(args.truth, encoding="utf-8") as fh:
            truth = Transform.from_dict(json.load(fh))
        out["error"] = transform_error(res.transform, truth)
    out["final_lam"] = float(res.lam[-1])
    out["final_matched"] = int(res.matched[-1])
    out["warnings"] = len(res.warnings)
    _emit_json(out, args.out)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "lam", "matched"])
            w.writerows(res.trace_rows())
    return EXIT_OK


def cmd_color(args):
    src = Image.from_uint8(read_image_file(args.src))
    tgt = Image.from_uint8(read_image_file(args.tgt))
    out = color_adapt(src, tgt, args.lam, k=args.k, k_target=args.k_target,
                      N=args.N, seed=args.seed, iters=args.iters)
    write_image_file(args.out, out.to_uint8())
    return EXIT_OK


def cmd_points_csv(args):
    sys.stdout.write(points_csv(read_points(args.file)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sopt", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def lam_arg(p, default=None):
        p.add_argument("--lam", type=float, required=default is None, default=default,
                       help="creation/destruction penalty per point")

    def p_arg(p):
        p.add_argument("--p", type=float, default=2.0, help="cost exponent (> 1)")

    s = sub.add_parser("opt1d", help="exact 1-D optimal partial transport")
    s.add_argument("file_x")
    s.add_argument("file_y")
    lam_arg(s)
    p_arg(s)
    s.add_argument("--verify", action="store_true",
                   help="check optimality conditions; exit 1 on violation")
    s.add_argument("--pot", type=float, default=None, metavar="PENALTY",
                   help="transport every source point; unmatched targets pay PENALTY")
    s.add_argument("--out", help="write JSON here instead of stdout")
    s.set_defaults(func=cmd_opt1d)

    s = sub.add_parser("bench", help="wall-clock sweep, CSV output")
    s.add_argument("--generator", choices=_bench.GENERATORS, default="uniform")
    s.add_argument("--sizes", default="500,1000,2000,4000,8000")
    s.add_argument("--lams", default=None, help="comma list; default depends on generator")
    s.add_argument("--repeats", type=int, default=10)
    s.add_argument("--extra-targets", type=int, default=1000, help="m = n + this")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")
    s.add_argument("--slope", action="store_true", help="print log-log slopes to stderr")
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("sopt", help="Monte-Carlo sliced partial transport")
    s.add_argument("file_x")
    s.add_argument("file_y")
    s.add_argument("--dim", type=int, default=None)
    lam_arg(s)
    p_arg(s)
    s.add_argument("--N", type=int, default=64, help="number of directions")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--slices", help="per-slice CSV path")
    s.set_defaults(func=cmd_sopt)

    s = sub.add_parser("register", help="similarity registration of two clouds")
    s.add_argument("file_x")
    s.add_argument("file_y")
    s.add_argument("--n0", type=int, default=None,
                   help="number of clean source points (default: all)")
    s.add_argument("--N", type=int, default=1500, help="iterations")
    s.add_argument("--lam0", type=float, default=None)
    p_arg(s)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--truth", help="JSON transform to score against")
    s.add_argument("--trace", help="per-iteration CSV path")
    s.add_argument("--out", help="write JSON here instead of stdout")
    s.set_defaults(func=cmd_register)

    s = sub.add_parser("color", help="color adaptation between two images")
    s.add_argument("src")
    s.add_argument("tgt")
    s.add_argument("-o", "--out", required=True)
    lam_arg(s, default=10.0)
    s.add_argument("--k", type=int, default=500, help="source palette size")
    s.add_argument("--k-target", type=int, default=None)
    s.add_argument("--N", type=int, default=400)
    s.add_argument("--iters", type=int, default=20, help="k-means iterations")
    s.add_argument("--seed", type=int, required=True)
    s.set_defaults(func=cmd_color)

    s = sub.add_parser("points-csv", help="convert a point file to CSV")
    s.add_argument("file")
    s.set_defaults(func=cmd_points_csv)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
