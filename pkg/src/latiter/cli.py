"""
Command-line front end.

    latiter solve CONFIG [--out-dir DIR]
    latiter verify CSV [CSV2] --config CONFIG [--p P]
    latiter tarski LATTICE (--map FILE | --all) [--sample N --seed S]
    latiter examples [--resolution N]

Exit codes are listed in ``EXIT_CODES``.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import errors
from .config import build_F, builtin_examples, load_config
from .finite import (
    DEFAULT_SEED,
    analyze_map,
    check_iteration_laws,
    parse_map_text,
    tarski_sweep,
)
from .lattice import read_lattice_file
from .maps import DiagonalMap, p_integral, read_map_csv, usc_report, write_map_csv
from .solver import compare_solutions, residual, solve

EXIT_CODES = {
    "ok": 0,
    "residual": 1,
    "config": 2,
    "regime": 3,
    "range": 4,
    "maxiter": 5,
    "not_monotone": 6,
    "grid": 7,
    "ascent": 8,
    "lattice": 9,
}

_ERROR_CODES = [
    (errors.RegimeViolation, "regime"),
    (errors.RangeEscape, "range"),
    (errors.MaxIterExceeded, "maxiter"),
    (errors.NotMonotone, "not_monotone"),
    (errors.GridMismatch, "grid"),
    (errors.MonotoneAscentViolated, "ascent"),
    (errors.NotALattice, "lattice"),
    (errors.CycleDetected, "lattice"),
    (errors.ExprError, "config"),
    (errors.ConfigError, "config"),
    (errors.NotASolution, "residual"),
]


def exit_code_for(exc: BaseException) -> int:
    for cls, name in _ERROR_CODES:
        if isinstance(exc, cls):
            return EXIT_CODES[name]
    return EXIT_CODES["config"]


ORDER_REVERSING_NOTE = (
    "note: the operator T is built from order-preserving data; with an "
    "order-reversing F the combination alpha*F breaks either the range bound "
    "or the monotonicity of T f, so the fixed-point construction does not apply."
)


def _overrides(args):
    return dict(tol=args.tol, tol_res=args.tol_res, max_iter=args.max_iter)


def write_plot_csv(path, report):
    fmin, fmax = report.f_star_min, report.f_star_max
    grid = fmin.grid
    n = grid.dim
    if isinstance(fmin, DiagonalMap):
        nodes = np.stack(grid.axes, axis=1)
    else:
        nodes = grid.nodes()
    cols = [f"x{i}" for i in range(1, n + 1)]
    cols += [f"fmin{i}" for i in range(1, n + 1)] + [f"fmax{i}" for i in range(1, n + 1)]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for x, a, b in zip(nodes, fmin.data, fmax.data):
            fh.write(",".join(format(float(v), ".17g") for v in (*x, *a, *b)) + "\n")


def cmd_solve(args) -> int:
    cfg = load_config(args.config).with_overrides(**_overrides(args))
    F = build_F(cfg)
    report = solve(F, cfg.coeffs, cfg.tol, cfg.tol_res, cfg.max_iter, label=cfg.label)
    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    write_map_csv(os.path.join(out, "f_min.csv"), report.f_star_min)
    write_map_csv(os.path.join(out, "f_max.csv"), report.f_star_max)
    write_plot_csv(os.path.join(out, "plot.csv"), report)
    text = report.format()
    if cfg.p_integral is not None and F.grid.dim == 1:
        text += f"\n[integrability]\np = {cfg.p_integral:g}\nintegral_F = {p_integral(F, cfg.p_integral)[0]:.12e}\n"
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(text)
    print(text, end="")
    return EXIT_CODES["ok"] if report.passed else EXIT_CODES["residual"]


def cmd_verify(args) -> int:
    cfg = load_config(args.config).with_overrides(**_overrides(args))
    F = build_F(cfg)
    c = cfg.coeffs
    cands = [read_map_csv(p) for p in args.csv]
    status = EXIT_CODES["ok"]
    lines = []
    for path, f in zip(args.csv, cands):
        if f.grid != F.grid or type(f) is not type(F):
            raise errors.GridMismatch(f"{path}: grid {f.grid!r} does not match config grid {F.grid!r}")
        r = residual(f, F, c)
        mono = f.check_monotone()
        usc = usc_report(f)
        lines += [
            f"[candidate {path}]",
            f"residual = {float(np.max(r)):.6e}",
            f"residual_per_component = {', '.join(f'{v:.6e}' for v in r)}",
            f"monotone = {bool(mono)}" + ("" if mono else f" (witness {mono.witness})"),
            f"usc = {usc.all_usc} ({usc.method})",
        ]
        p = args.p if args.p is not None else cfg.p_integral
        if p is not None and f.grid.dim == 1:
            lines.append(f"p_integral(p={p:g}) = {p_integral(f, p)[0]:.12e}")
        if float(np.max(r)) > cfg.tol_res:
            lines.append(f"verdict = not a solution at tol_res {cfg.tol_res:.1e}")
            status = EXIT_CODES["residual"]
        else:
            lines.append("verdict = solution within tol_res")
    if len(cands) == 2 and status == EXIT_CODES["ok"]:
        v = compare_solutions(cands[0], cands[1], F, c, tol=cfg.tol_res)
        lines += [
            "[compare]",
            f"verdict = {v.verdict}",
            f"clause = {v.clause or '-'}",
            f"distance = {v.distance:.6e}",
        ]
        if v.detail:
            lines.append(f"detail = {v.detail}")
        if v.verdict == "inconsistent":
            status = EXIT_CODES["residual"]
    print("\n".join(lines))
    return status


def cmd_tarski(args) -> int:
    lat = read_lattice_file(args.lattice)
    print(f"lattice: {len(lat)} elements, bottom {lat.bottom}, top {lat.top}")
    if args.map:
        with open(args.map) as fh:
            f = parse_map_text(lat, fh.read())
        finding = analyze_map(f)
        print("\n".join(finding.lines()))
        if not finding.monotone:
            print(
                f"  order-preserving check failed: {finding.map.monotone_witness()[0]} is below "
                f"{finding.map.monotone_witness()[1]} but their images are not ordered"
            )
            return EXIT_CODES["not_monotone"]
        return EXIT_CODES["ok"]

    if args.sample:
        laws = check_iteration_laws(lat, sample=args.sample, seed=args.seed)
        print(f"sampled {laws.maps} monotone maps (seed {args.seed})")
    else:
        sweep = tarski_sweep(lat)
        laws = check_iteration_laws(lat)
        print(f"{sweep.maps} monotone maps; all iteration laws hold" if laws.ok else laws.summary())
        print(
            f"fixed sets nonempty: {sweep.nonempty}/{sweep.maps}; "
            f"Tarski extremes are extreme fixed points: {sweep.extremes_ok}/{sweep.maps}; "
            f"Kleene agrees: {sweep.kleene_ok}/{sweep.maps}"
        )
        print(
            f"complete in induced order: {sweep.induced_complete}/{sweep.maps}; "
            f"sublattice of X: {sweep.sublattice}/{sweep.maps}"
        )
        for f, w in sweep.non_sublattice_examples:
            print(f"  not a sublattice of X: {f!r}; {w[0]} of {w[1]}, {w[2]} is {w[3]}, not fixed")
        if not sweep.ok:
            return EXIT_CODES["residual"]
    print(laws.summary())
    return EXIT_CODES["ok"] if laws.ok else EXIT_CODES["residual"]


def run_examples(resolution=None, tol=None, tol_res=None, max_iter=None):
    """Solve the built-in examples; returns (rows, reports)."""
    rows, reports = [], []
    for cfg in builtin_examples(resolution):
        cfg = cfg.with_overrides(tol=tol, tol_res=tol_res, max_iter=max_iter)
        F = build_F(cfg)
        rep = solve(F, cfg.coeffs, cfg.tol, cfg.tol_res, cfg.max_iter, label=cfg.label)
        integral = p_integral(F, cfg.p_integral)[0] if cfg.p_integral is not None else None
        rows.append((cfg, rep, integral))
        reports.append(rep)
    return rows, reports


def cmd_examples(args) -> int:
    t0 = time.perf_counter()
    rows, _ = run_examples(args.resolution, args.tol, args.tol_res, args.max_iter)
    head = f"{'example':<16}{'dim':>4}{'nodes/axis':>11}{'iters':>8}{'residual':>14}{'f_min(bottom)':>16}{'f_min(top)':>14}{'int|F|^p':>16}  status"
    print(head)
    passed = 0
    for cfg, rep, integral in rows:
        g = rep.f_star_min.grid
        res = max(float(np.max(rep.residual_min)), float(np.max(rep.residual_max)))
        lo = rep.f_star_min.eval(g.box.bottom)[0]
        hi = rep.f_star_min.eval(g.box.top)[0]
        integ = f"{integral:.10f}" if integral is not None else "-"
        ok = rep.passed
        passed += ok
        print(
            f"{cfg.label:<16}{g.dim:>4}{g.resolution[0]:>11}"
            f"{rep.iterations_min:>4}/{rep.iterations_max:<3}{res:>14.3e}{lo:>16.10f}{hi:>14.10f}{integ:>16}  "
            f"{'pass' if ok else 'FAIL'}"
        )
    print(f"{passed}/{len(rows)} pass")
    print(f"\n[diagnostics]\nwall_time_s = {time.perf_counter() - t0:.3f}")
    return EXIT_CODES["ok"] if passed == len(rows) else EXIT_CODES["residual"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="sup-norm change tolerance")
    common.add_argument("--tol-res", type=float, dest="tol_res", help="residual tolerance")
    common.add_argument("--max-iter", type=int, dest="max_iter")
    common.add_argument("--out-dir", default=".", dest="out_dir")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = argparse.ArgumentParser(prog="latiter", description=__doc__.split("\n\n")[0].strip())
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve the equation for a config")
    s.add_argument("config")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", parents=[common], help="check candidate solutions")
    v.add_argument("csv", nargs="+")
    v.add_argument("--config", required=True)
    v.add_argument("--p", type=float, help="also report the p-integral (1-D)")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("tarski", parents=[common], help="finite-lattice fixed-point checks")
    t.add_argument("lattice")
    g = t.add_mutually_exclusive_group(required=True)
    g.add_argument("--map")
    g.add_argument("--all", action="store_true")
    t.add_argument("--sample", type=int, help="sample N maps instead of enumerating")
    t.set_defaults(func=cmd_tarski)

    e = sub.add_parser("examples", parents=[common], help="reproduce the worked examples")
    e.add_argument("--resolution", type=int)
    e.set_defaults(func=cmd_examples)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "verify" and len(args.csv) > 2:
        parser.error("verify takes one or two candidate files")
    try:
        return args.func(args)
    except errors.LatiterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, errors.NotMonotone) and args.command in ("solve", "verify"):
            print(ORDER_REVERSING_NOTE, file=sys.stderr)
        return exit_code_for(exc)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["config"]


if __name__ == "__main__":
    sys.exit(main())
