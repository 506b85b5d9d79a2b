"""Threshold report rows and regeneration of the reference threshold tables.

The reference values ship as ``data/reference_tables.csv`` (comment
lines start with ``#``). Regenerated tables are deterministic: no timing
columns, fixed float formatting, rows in reference order.
"""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .chain import chain_threshold
from .ensembles import EnsembleSpec, Family, base_matrix, density, design_rate, randomized_rate, regular_rate
from .protograph_de import MAX_ITERS, STALL_TOL, TOL_EPS, TOL_MSG, bp_threshold

EPS_TOL = 2e-4
RATE_TOL = 1e-6
MAP_NOTE = "reference-only, not computed"

TABLE_FILES = {
    1: "table1_regular.csv",
    2: "table2_sc_ldpc.csv",
    3: "table3_sc_mn.csv",
    4: "table4_sc_ha.csv",
}

REPORT_FIELDS = ["family", "l", "r", "g", "L", "w", "eps_bp", "rate", "density", "iterations",
                 "wall_time", "note"]
TABLE_FIELDS = ["family", "l", "r", "g", "L", "eps_bp", "eps_bp_ref", "eps_diff", "rate", "rate_ref",
                "rate_diff", "iterations", "pass"]


class ConfigError(RuntimeError):
    """Unusable configuration, such as a missing or empty reference dataset."""


@dataclass(frozen=True)
class Tolerances:
    tol_eps: float = TOL_EPS
    tol_msg: float = TOL_MSG
    max_iters: int = MAX_ITERS
    stall_tol: float = STALL_TOL

    def __post_init__(self):
        if min(self.tol_eps, self.tol_msg, self.stall_tol) <= 0 or self.max_iters < 1:
            raise ValueError("tolerances and max_iters must be positive")


@dataclass(frozen=True)
class ReferenceRow:
    table: int
    spec: EnsembleSpec
    eps_bp: float
    rate: float | None
    eps_map: float | None
    full: bool


def _opt_float(text: str) -> float | None:
    return float(text) if text.strip() else None


def load_reference(path: str | os.PathLike | None = None) -> list[ReferenceRow]:
    """Parse the reference dataset; raises :class:`ConfigError` when it holds no rows."""
    if path is None:
        text = resources.files("scmn").joinpath("data/reference_tables.csv").read_text()
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read reference file {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) < 2:
        raise ConfigError("reference dataset is empty")
    rows = []
    try:
        for rec in csv.DictReader(lines):
            spec = EnsembleSpec(Family(rec["family"]), int(rec["l"]), int(rec["r"]), int(rec["g"] or 0),
                                int(rec["L"]) if rec["L"].strip() else None)
            rows.append(ReferenceRow(int(rec["table"]), spec, float(rec["eps_bp"]), _opt_float(rec["rate"]),
                                     _opt_float(rec["eps_map"]), rec.get("full", "0").strip() == "1"))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed reference dataset: {exc}") from exc
    return rows


def ensemble_rate(spec: EnsembleSpec) -> Fraction | float:
    if spec.family is Family.REGULAR_LDPC:
        return regular_rate(spec.l, spec.r)
    if spec.family is Family.RSC_MN:
        return randomized_rate(spec.l, spec.r, spec.g, spec.L, spec.w)
    return design_rate(spec)


def compute_threshold(spec: EnsembleSpec, tol: Tolerances = Tolerances()):
    if spec.family is Family.RSC_MN:
        if spec.L is None:
            raise ValueError("rsc-mn needs a finite L")
        return chain_threshold(spec.l, spec.r, spec.g, spec.L, spec.w, tol.tol_eps, tol.tol_msg,
                               tol.max_iters, tol.stall_tol)
    return bp_threshold(base_matrix(spec), tol.tol_eps, tol.tol_msg, tol.max_iters, tol.stall_tol)


def threshold_report(spec: EnsembleSpec, tol: Tolerances = Tolerances()) -> dict:
    """One report row: threshold, rate and density of ``spec`` plus run statistics."""
    start = time.perf_counter()
    res = compute_threshold(spec, tol)
    wall = time.perf_counter() - start
    dens = None
    if spec.family in (Family.SC_MN, Family.SC_HA):
        d = density(spec)
        dens = d.exact if d.exact is not None else d.limit
    note = ""
    if not res.has_threshold:
        note = "no BP threshold"
    elif res.epsilon_bp >= 1.0:
        note = "decodes at every eps"
    return {
        "family": spec.family.value,
        "l": spec.l,
        "r": spec.r,
        "g": spec.g,
        "L": spec.L,
        "w": spec.w,
        "eps_bp": res.epsilon_bp,
        "rate": float(ensemble_rate(spec)),
        "density": None if dens is None else float(dens),
        "iterations": res.iterations_at_threshold,
        "wall_time": wall,
        "note": note,
    }


def _fmt(v, digits: int = 9) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return str(v)


def report_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_FIELDS)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in REPORT_FIELDS])
    return buf.getvalue()


def _table_row(ref: ReferenceRow, tol: Tolerances) -> dict:
    res = compute_threshold(ref.spec, tol)
    rate = None if ref.rate is None else float(ensemble_rate(ref.spec))
    eps_diff = res.epsilon_bp - ref.eps_bp
    rate_diff = None if rate is None else rate - ref.rate
    ok = res.has_threshold and abs(eps_diff) <= EPS_TOL and (rate_diff is None or abs(rate_diff) <= RATE_TOL)
    row = {
        "family": ref.spec.family.value,
        "l": ref.spec.l,
        "r": ref.spec.r,
        "g": ref.spec.g,
        "L": ref.spec.L,
        "eps_bp": res.epsilon_bp,
        "eps_bp_ref": ref.eps_bp,
        "eps_diff": eps_diff,
        "rate": rate,
        "rate_ref": ref.rate,
        "rate_diff": rate_diff,
        "iterations": res.iterations_at_threshold,
        "pass": "PASS" if ok else "FAIL",
    }
    if ref.table == 1:
        row["eps_map_ref"] = ref.eps_map
        row["eps_map_note"] = MAP_NOTE
    return row


def _table_row_job(args):
    return _table_row(*args)


def regenerate_tables(reference: list[ReferenceRow], full: bool = False, workers: int = 1,
                      tol: Tolerances = Tolerances()) -> dict[int, list[dict]]:
    """Recompute every selected reference row; rows keep reference order."""
    selected = [ref for ref in reference if full or not ref.full]
    jobs = [(ref, tol) for ref in selected]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_table_row_job, jobs))
    else:
        results = [_table_row_job(job) for job in jobs]
    tables: dict[int, list[dict]] = {}
    for ref, row in zip(selected, results):
        tables.setdefault(ref.table, []).append(row)
    return tables


def table_csv(table: int, rows: list[dict]) -> str:
    fields = TABLE_FIELDS + (["eps_map_ref", "eps_map_note"] if table == 1 else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in fields])
    return buf.getvalue()


def row_label(row: dict) -> str:
    label = f"{row['family']}(l={row['l']},r={row['r']}"
    if row["g"]:
        label += f",g={row['g']}"
    if row["L"] is not None:
        label += f",L={row['L']}"
    return label + ")"


def tables_summary(tables: dict[int, list[dict]]) -> dict:
    entries = []
    for t in sorted(tables):
        rows = tables[t]
        failed = [r for r in rows if r["pass"] != "PASS"]
        entries.append({
            "table": t,
            "file": TABLE_FILES.get(t, f"table{t}.csv"),
            "rows": len(rows),
            "failed": len(failed),
            "failed_rows": [row_label(r) for r in failed],
        })
    return {"tables": entries, "all_pass": all(e["failed"] == 0 for e in entries)}
