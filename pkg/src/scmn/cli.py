"""Command-line front end.

Exit codes: 0 ok, 1 numeric failure (reference mismatch or continuation
failure), 2 usage error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .ebp import STEP, ContinuationError, EBPCurve, trace_curve, wiggle_amplitude
from .ensembles import EnsembleSpec, Family, base_matrix
from .gf2 import (SamplingError, gf2_inverse, gf2_matmul, ha_parity_check, mn_generator,
                  sample_invertible_regular, sample_regular)
from .reports import (TABLE_FILES, ConfigError, Tolerances, load_reference, regenerate_tables, report_csv,
                      table_csv, tables_summary, threshold_report)

log = logging.getLogger("scmn")

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3

OUTPUT_DIR_ENV = "SCMN_OUTPUT_DIR"
FORMATS = ("csv", "json")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return vals


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _default_outdir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, ".")


def _add_ensemble_args(p: argparse.ArgumentParser, need_family: bool = True):
    if need_family:
        p.add_argument("--family", required=True, choices=[f.value for f in Family])
    p.add_argument("-l", type=int, required=True, help="information-side (variable) degree")
    p.add_argument("-r", type=int, required=True, help="check-side degree")
    p.add_argument("-g", type=int, default=0, help="parity (LDGM) degree")
    p.add_argument("-L", type=int, default=None, help="coupling half-width; Lhat = 2L+1")


def _add_tolerance_args(p: argparse.ArgumentParser):
    tol = Tolerances()
    p.add_argument("--tol-eps", type=float, default=tol.tol_eps)
    p.add_argument("--tol-msg", type=float, default=tol.tol_msg)
    p.add_argument("--max-iters", type=int, default=tol.max_iters)
    p.add_argument("--stall-tol", type=float, default=tol.stall_tol)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scmn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("base", help="write a protograph base matrix")
    _add_ensemble_args(p)
    p.add_argument("--format", dest="fmt", choices=("text", "json"), default="text")
    p.add_argument("-o", "--output", default=None, help="output file (default: stdout)")

    p = sub.add_parser("threshold", help="BP threshold, rate and density of one ensemble")
    _add_ensemble_args(p)
    p.add_argument("-w", type=_int_list, default=[1], help="window(s) for rsc-mn, comma-separated")
    _add_tolerance_args(p)
    p.add_argument("--format", dest="fmt", choices=FORMATS, default="csv")
    p.add_argument("-o", "--output", default=None, help="output file (default: stdout)")

    p = sub.add_parser("tables", help="regenerate the reference threshold tables with a diff")
    p.add_argument("--full", action="store_true", help="include the long-running rows")
    p.add_argument("--reference", default=None, help="reference CSV (default: bundled dataset)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--outdir", default=None, help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)")
    _add_tolerance_args(p)

    p = sub.add_parser("ebp", help="trace EBP EXIT curves of the randomized SC-MN ensemble")
    _add_ensemble_args(p, need_family=False)
    p.add_argument("-w", type=_int_list, required=True, help="window(s), comma-separated")
    p.add_argument("--step", type=float, default=STEP, help="anchor step")
    p.add_argument("--anchors", type=_float_list, default=None, help="explicit decreasing anchor grid")
    p.add_argument("--format", dest="fmt", choices=FORMATS, default="csv")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--outdir", default=None, help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)")

    p = sub.add_parser("duality", help="check MN generator = HA parity check on seeded GF(2) instances")
    p.add_argument("-l", type=int, default=6)
    p.add_argument("-r", type=int, default=3)
    p.add_argument("-g", type=int, default=3)
    p.add_argument("-N", type=int, default=32, help="number of parity bits (rows of H1)")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _emit(text: str, output: str | None):
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _outdir(arg: str | None) -> Path:
    out = Path(arg or _default_outdir())
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    return out


def cmd_base(args) -> int:
    spec = EnsembleSpec(Family(args.family), args.l, args.r, args.g, args.L)
    base = base_matrix(spec)
    _emit(base.to_text() if args.fmt == "text" else base.to_json(), args.output)
    return EXIT_OK


def cmd_threshold(args) -> int:
    tol = Tolerances(args.tol_eps, args.tol_msg, args.max_iters, args.stall_tol)
    family = Family(args.family)
    windows = args.w if family is Family.RSC_MN else [1]
    specs = [EnsembleSpec(family, args.l, args.r, args.g, args.L, w) for w in windows]
    rows = [threshold_report(spec, tol) for spec in specs]
    if args.fmt == "csv":
        text = report_csv(rows)
    else:
        text = json.dumps({"rows": rows}, indent=1) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def cmd_tables(args) -> int:
    tol = Tolerances(args.tol_eps, args.tol_msg, args.max_iters, args.stall_tol)
    reference = load_reference(args.reference)
    out = _outdir(args.outdir)
    tables = regenerate_tables(reference, full=args.full, workers=max(1, args.workers), tol=tol)
    for t, rows in sorted(tables.items()):
        (out / TABLE_FILES.get(t, f"table{t}.csv")).write_text(table_csv(t, rows))
    summary = tables_summary(tables)
    (out / "tables_summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    for entry in summary["tables"]:
        status = "ok" if entry["failed"] == 0 else "FAIL " + " ".join(entry["failed_rows"])
        print(f"table {entry['table']}: {entry['rows'] - entry['failed']}/{entry['rows']} rows within tolerance"
              f" -> {out / entry['file']} [{status}]")
    return EXIT_OK if summary["all_pass"] else EXIT_NUMERIC


def _trace_job(job):
    l, r, g, L, w, anchors, step = job
    try:
        return trace_curve(l, r, g, L, w, anchor_grid=anchors, step=step), None
    except ContinuationError as exc:
        return exc.curve or EBPCurve(l, r, g, L, w), str(exc)


def _wiggle_rows(results) -> list[dict]:
    rows = []
    for curve, err in results:
        n = len(curve.points)
        rows.append({
            "w": curve.w,
            "points": n,
            "cliff_eps": curve.cliff_epsilon() if n else None,
            "wiggle_amplitude": wiggle_amplitude(curve) if n else 0.0,
            "max_residual": float(curve.residuals.max()) if n else None,
            "status": "ok" if err is None else f"partial: {err}",
        })
    return rows


def _curve_stem(curve: EBPCurve) -> str:
    return f"ebp_l{curve.l}_r{curve.r}_g{curve.g}_L{curve.L}_w{curve.w}"


def cmd_ebp(args) -> int:
    if args.L is None:
        raise ValueError("ebp needs -L")
    if args.g < 1:
        raise ValueError("ebp needs -g >= 1")
    EnsembleSpec(Family.RSC_MN, args.l, args.r, args.g, args.L)
    out = _outdir(args.outdir)
    jobs = [(args.l, args.r, args.g, args.L, w, args.anchors, args.step) for w in args.w]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(args.workers, len(jobs))) as pool:
            results = list(pool.map(_trace_job, jobs))
    else:
        results = [_trace_job(job) for job in jobs]
    for curve, _ in results:
        stem = _curve_stem(curve)
        if args.fmt == "csv":
            (out / f"{stem}.csv").write_text(curve.to_csv())
            (out / f"{stem}_wide.csv").write_text(curve.to_wide_csv())
        else:
            (out / f"{stem}.json").write_text(curve.to_json())
    rows = _wiggle_rows(results)
    stem = f"wiggle_l{args.l}_r{args.r}_g{args.g}_L{args.L}"
    if args.fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        (out / f"{stem}.csv").write_text(buf.getvalue())
    else:
        (out / f"{stem}.json").write_text(json.dumps({"l": args.l, "r": args.r, "g": args.g, "L": args.L,
                                                      "curves": rows}, indent=1) + "\n")
    for row in rows:
        print(f"w={row['w']}: {row['points']} points, cliff eps {row['cliff_eps']}, "
              f"wiggle amplitude {row['wiggle_amplitude']:.3e} [{row['status']}]")
    return EXIT_OK if all(err is None for _, err in results) else EXIT_NUMERIC


def cmd_duality(args) -> int:
    if args.l % args.r:
        raise ValueError("duality needs l divisible by r (H1 is N x (r/l)N)")
    rng = np.random.default_rng(args.seed)
    n_info = args.r * args.N // args.l
    if n_info * args.l != args.r * args.N:
        raise ValueError("r*N must be divisible by l")
    failures = 0
    for i in range(args.instances):
        try:
            H1 = sample_regular(args.N, n_info, args.l, args.r, rng)
            H2 = sample_invertible_regular(args.N, args.g, rng)
        except SamplingError as exc:
            raise ConfigError(str(exc)) from exc
        G = mn_generator(H1, H2)
        ok = np.array_equal(G, ha_parity_check(H1, H2))
        ok &= np.array_equal(gf2_matmul(H2, gf2_inverse(H2)), np.eye(args.N, dtype=np.uint8))
        failures += not ok
        print(f"instance {i}: {'ok' if ok else 'MISMATCH'}")
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


COMMANDS = {
    "base": cmd_base,
    "threshold": cmd_threshold,
    "tables": cmd_tables,
    "ebp": cmd_ebp,
    "duality": cmd_duality,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"scmn: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"scmn {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
