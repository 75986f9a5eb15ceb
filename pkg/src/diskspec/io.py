"""File formats: zero tables, point lists, search reports and experiment records.

Files that are read back (zero tables, records, report JSON) store floats in
round-trip form; the human-facing configuration CSV uses 12 significant digits.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Optional, TextIO

import numpy as np

from .bessel import DEFAULT_REFINE_TOL, ZeroTable, table_from_zeros
from .errors import DomainError, SchemaError
from .experiments import ExperimentRecord
from .geometry import Configuration, Point, Violation, as_points
from .search import SearchReport

CONFIG_PREFIX = "# run_config: "
ZERO_COLUMNS = ["n", "j1n", "rn", "residual", "mcmahon_error"]


def _g12(v: float) -> str:
    return format(v, ".12g")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False)


def _header_lines(fh: TextIO) -> tuple[Optional[dict], list[str]]:
    """Split a file into its embedded run config and the remaining lines."""
    config = None
    body = []
    for line in fh:
        if line.startswith(CONFIG_PREFIX):
            config = json.loads(line[len(CONFIG_PREFIX):])
        elif line.startswith("#"):
            continue
        else:
            body.append(line)
    return config, body


# --- zero tables ------------------------------------------------------------

def zero_rows(table: ZeroTable) -> list[dict]:
    res = table.residuals()
    err = table.mcmahon_errors()
    return [
        {"n": k + 1, "j1n": float(table.j_zeros[k]), "rn": float(table.r_zeros[k]),
         "residual": float(res[k]), "mcmahon_error": float(err[k])}
        for k in range(table.n_max)
    ]


def write_zero_table(table: ZeroTable, fh: TextIO, fmt: str = "csv",
                     run_config: Optional[dict] = None) -> None:
    meta = {"r_max": table.r_max, "refine_tol": table.refine_tol}
    if fmt == "json":
        doc = {"run_config": run_config, **meta, "zeros": zero_rows(table)}
        fh.write(_dumps(doc) + "\n")
        return
    if fmt != "csv":
        raise DomainError(f"unknown format {fmt!r}")
    if run_config is not None:
        fh.write(CONFIG_PREFIX + _dumps(run_config) + "\n")
    fh.write(f"# table: {_dumps(meta)}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(ZERO_COLUMNS)
    for row in zero_rows(table):
        writer.writerow([row["n"], repr(row["j1n"]), repr(row["rn"]),
                         _g12(row["residual"]), _g12(row["mcmahon_error"])])


def read_zero_table(path: Path) -> ZeroTable:
    """Load a table written by ``write_zero_table``; certificates are re-checked."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        zeros = [row["j1n"] for row in doc["zeros"]]
        return table_from_zeros(zeros, doc["r_max"], doc.get("refine_tol", DEFAULT_REFINE_TOL))
    meta = {}
    for line in text.splitlines():
        if line.startswith("# table: "):
            meta = json.loads(line[len("# table: "):])
    _, body = _header_lines(io.StringIO(text))
    reader = csv.DictReader(body)
    if reader.fieldnames is None or not set(ZERO_COLUMNS) <= set(reader.fieldnames):
        raise SchemaError(f"{path}: expected columns {ZERO_COLUMNS}")
    rows = list(reader)
    for expect, row in enumerate(rows, start=1):
        if int(row["n"]) != expect:
            raise SchemaError(f"{path}: zero indices are not 1..n")
    zeros = [float(row["j1n"]) for row in rows]
    r_max = meta.get("r_max", float(rows[-1]["rn"]) if rows else 0.0)
    return table_from_zeros(zeros, r_max, meta.get("refine_tol", DEFAULT_REFINE_TOL))


# --- point lists ------------------------------------------------------------

def read_points(path: Path) -> tuple[Point, ...]:
    """Points from a JSON array ([[x, y], ...] or [{"x":..,"y":..}, ...]) or a CSV of x,y."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("["):
        data = json.loads(text)
        pts = [(p["x"], p["y"]) if isinstance(p, dict) else tuple(p) for p in data]
        return as_points(pts)
    pts = []
    seen_header = False
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].lstrip().startswith("#"):
            continue
        try:
            pts.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError):
            # A non-numeric first row is a header.
            if pts or seen_header:
                raise SchemaError(f"{path}: malformed row {row!r}") from None
            seen_header = True
    return as_points(pts)


# --- configurations and reports ----------------------------------------------

def config_to_dict(cfg: Configuration) -> dict:
    return {
        "points": [[p.x, p.y] for p in cfg.points],
        "tol": cfg.tol,
        "certified": cfg.certified,
        "violations": [v._asdict() for v in cfg.violations],
    }


def config_from_dict(doc: dict) -> Configuration:
    return Configuration(
        points=as_points(doc["points"]),
        tol=float(doc["tol"]),
        certified=bool(doc["certified"]),
        violations=tuple(Violation(**v) for v in doc.get("violations", [])),
    )


def report_to_dict(report: SearchReport, run_config: Optional[dict] = None) -> dict:
    return {
        "run_config": run_config,
        "seed_n": report.seed_n,
        "tol": report.tol,
        "r_max": report.r_max,
        "max_nodes": report.max_nodes,
        "target_size": report.target_size,
        "nodes_expanded": report.nodes_expanded,
        "truncated": report.truncated,
        "best_size": report.best_size,
        "size_histogram": {str(k): v for k, v in report.size_histogram.items()},
        "best": [config_to_dict(c) for c in report.best],
    }


def report_from_dict(doc: dict) -> SearchReport:
    try:
        return SearchReport(
            best=tuple(config_from_dict(c) for c in doc["best"]),
            nodes_expanded=int(doc["nodes_expanded"]),
            size_histogram={int(k): int(v) for k, v in doc["size_histogram"].items()},
            truncated=bool(doc.get("truncated", False)),
            seed_n=int(doc.get("seed_n", 1)),
            tol=float(doc["tol"]),
            r_max=float(doc.get("r_max", 0.0)),
            max_nodes=int(doc.get("max_nodes", 0)),
            target_size=doc.get("target_size"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed search report: {exc}") from exc


def write_report(report: SearchReport, json_path: Path, run_config: Optional[dict] = None) -> Path:
    """Write the JSON report and a sibling CSV of the best configurations."""
    json_path = Path(json_path)
    json_path.write_text(_dumps(report_to_dict(report, run_config)) + "\n")
    csv_path = json_path.with_suffix(".csv")
    with csv_path.open("w", newline="") as fh:
        if run_config is not None:
            fh.write(CONFIG_PREFIX + _dumps(run_config) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["config_id", "point_index", "x", "y"])
        for cid, cfg in enumerate(report.best):
            for pid, p in enumerate(cfg.points):
                writer.writerow([cid, pid, _g12(p.x), _g12(p.y)])
    return csv_path


def read_report(path: Path) -> SearchReport:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    return report_from_dict(doc)


# --- experiment records -------------------------------------------------------

def _num(v: float) -> str:
    return repr(float(v))


def record_columns(records: Iterable[ExperimentRecord]) -> list[str]:
    params, measured = [], []
    for rec in records:
        params += [k for k in rec.parameters if k not in params]
        measured += [k for k in rec.measured if k not in measured]
    return (["experiment_id", "passed"] + [f"param:{k}" for k in params]
            + [f"measured:{k}" for k in measured])


def write_records(records: list[ExperimentRecord], fh: TextIO, run_config: Optional[dict] = None) -> None:
    if run_config is not None:
        fh.write(CONFIG_PREFIX + _dumps(run_config) + "\n")
    cols = record_columns(records)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(cols)
    for rec in records:
        row = [rec.experiment_id, "true" if rec.passed else "false"]
        for col in cols[2:]:
            kind, key = col.split(":", 1)
            src = rec.parameters if kind == "param" else rec.measured
            row.append(_num(src[key]) if key in src else "")
        writer.writerow(row)


def records_to_json(records: list[ExperimentRecord]) -> list[dict]:
    return [{"experiment_id": r.experiment_id, "parameters": r.parameters,
             "measured": r.measured, "passed": r.passed} for r in records]


def read_records(path: Path) -> list[ExperimentRecord]:
    """Records from a CSV written by ``write_records`` or the JSON equivalent."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith(("[", "{")):
        doc = json.loads(text)
        items = doc["records"] if isinstance(doc, dict) else doc
        try:
            return [ExperimentRecord(d["experiment_id"], dict(d["parameters"]),
                                     dict(d["measured"]), bool(d["passed"])) for d in items]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"{path}: malformed record ({exc})") from exc
    _, body = _header_lines(io.StringIO(text))
    if not body:
        return []
    reader = csv.DictReader(body)
    cols = reader.fieldnames or []
    if cols[:2] != ["experiment_id", "passed"] or any(
            not c.startswith(("param:", "measured:")) for c in cols[2:]):
        raise SchemaError(f"{path}: not an experiment-record file (columns {cols})")
    out = []
    for row in reader:
        if row["passed"] not in ("true", "false"):
            raise SchemaError(f"{path}: bad passed value {row['passed']!r}")
        rec = ExperimentRecord(row["experiment_id"], passed=row["passed"] == "true")
        for col in cols[2:]:
            if row[col] == "":
                continue
            kind, key = col.split(":", 1)
            try:
                value = float(row[col])
            except ValueError as exc:
                raise SchemaError(f"{path}: non-numeric {col}") from exc
            (rec.parameters if kind == "param" else rec.measured)[key] = value
        out.append(rec)
    return out


def covering_r_max(points) -> float:
    """Table range needed to certify every pairwise distance of ``points``."""
    arr = np.array(as_points(points)).reshape(-1, 2)
    if len(arr) < 2:
        return 1.0
    diff = arr[:, None, :] - arr[None, :, :]
    span = float(np.hypot(diff[..., 0], diff[..., 1]).max())
    return max(1.0, math.ceil(span) + 1.0)
