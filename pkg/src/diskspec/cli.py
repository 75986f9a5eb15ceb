"""Command line entry point: ``diskspec {zeros,verify,search,experiment,report}``.

Exit codes: 0 success, 1 domain or schema error, 2 search budget exhausted,
3 I/O failure.  Errors are also written to stderr as a JSON object.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import experiments as ex
from .bessel import DEFAULT_REFINE_TOL, ZeroTable, build_zero_table
from .errors import ClassificationDomainError, DiskSpecError, DomainError, RangeError
from .geometry import (
    DEFAULT_TOL,
    classify_hyperbola,
    first_quadrant,
    min_gap,
    strip_width,
    verify_configuration,
)
from .io import (
    covering_r_max,
    read_points,
    read_records,
    read_report,
    read_zero_table,
    records_to_json,
    write_records,
    write_report,
    write_zero_table,
)
from .search import SearchBudget, search_maximal

OUTPUT_DIR_ENV = "DISKSPEC_OUTPUT_DIR"
EXIT_OK, EXIT_DOMAIN, EXIT_TRUNCATED, EXIT_IO = 0, 1, 2, 3

# Execution-only flags: they never change results, so they stay out of the
# embedded header and identical runs produce identical bytes.
_EXECUTION_ONLY = {"workers", "out"}


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_path: Optional[str] = None

    def header(self) -> dict:
        params = {k: v for k, v in self.parameters.items() if k not in _EXECUTION_ONLY}
        return {"subcommand": self.subcommand, "parameters": params, "seed": self.seed}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diskspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("zeros", help="tabulate zeros of the disk's Fourier transform")
    p.add_argument("--r-max", type=float, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_REFINE_TOL)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")

    p = sub.add_parser("verify", help="certify a point list")
    p.add_argument("points", help="CSV (x,y per line) or JSON array")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--delta", type=float)
    p.add_argument("--table")
    p.add_argument("--out")

    p = sub.add_parser("search", help="search for large orthogonal configurations")
    p.add_argument("--seed-n", type=int, required=True)
    p.add_argument("--r-max", type=float, required=True)
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--max-nodes", type=float, required=True)
    p.add_argument("--target-size", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--table")
    p.add_argument("--out")

    p = sub.add_parser("experiment", help="run a named experiment")
    p.add_argument("--name", required=True, choices=sorted(EXPERIMENTS))
    p.add_argument("--in", dest="inputs", action="append", default=[],
                   help="search report JSON (repeatable)")
    p.add_argument("--R", type=float, action="append", default=[])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--constants")
    p.add_argument("--table")
    p.add_argument("--out")

    p = sub.add_parser("report", help="merge and re-evaluate experiment records")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--constants")
    p.add_argument("--out")
    return parser


@contextmanager
def _output(path: Optional[str], default_name: str):
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        path = str(Path(os.environ[OUTPUT_DIR_ENV]) / default_name)
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", newline="") as fh:
        yield fh


def _resolve_out(path: Optional[str], default_name: str) -> Path:
    if path is not None:
        return Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base is None:
        raise DomainError("--out is required (or set DISKSPEC_OUTPUT_DIR)")
    return Path(base) / default_name


def _table(path: Optional[str], need: float) -> ZeroTable:
    if path is None:
        return build_zero_table(max(need, 1.0))
    table = read_zero_table(Path(path))
    if table.r_max < need:
        raise RangeError(f"table {path} covers r <= {table.r_max}, need {need}")
    return table


# --- subcommands --------------------------------------------------------------

def cmd_zeros(cfg: RunConfig) -> int:
    p = cfg.parameters
    table = build_zero_table(p["r_max"], p["tol"])
    with _output(p.get("out"), f"zeros.{p['format']}") as fh:
        write_zero_table(table, fh, p["format"], cfg.header())
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    p = cfg.parameters
    pts = read_points(Path(p["points"]))
    table = _table(p.get("table"), covering_r_max(pts))
    conf = verify_configuration(pts, table, p["tol"])
    doc = {
        "run_config": cfg.header(),
        "certified": conf.certified,
        "size": conf.size,
        "tol": conf.tol,
        "violations": [v._asdict() for v in conf.violations],
        "min_gap": min_gap(pts) if len(pts) >= 2 else None,
        "strip_width": strip_width(pts) if len(pts) >= 2 else None,
    }
    if p.get("delta") is not None:
        rows = []
        for idx, q in enumerate(first_quadrant(pts)):
            try:
                c = classify_hyperbola(q, p["delta"])
                rows.append({"index": idx, **c.__dict__, "sign_agrees": c.sign_agrees})
            except ClassificationDomainError as exc:
                rows.append({"index": idx, "skipped": str(exc)})
        doc["hyperbola"] = rows
    with _output(p.get("out"), "verify.json") as fh:
        fh.write(json.dumps(doc, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_search(cfg: RunConfig) -> int:
    p = cfg.parameters
    max_nodes = p["max_nodes"]
    if max_nodes != int(max_nodes):
        raise DomainError("--max-nodes must be an integer")
    budget = SearchBudget(int(max_nodes), p["r_max"], p["tol"], p.get("target_size"))
    table = _table(p.get("table"), p["r_max"])
    report = search_maximal(p["seed_n"], budget, table, workers=p.get("workers", 1))
    write_report(report, _resolve_out(p.get("out"), "search.json"), cfg.header())
    return EXIT_TRUNCATED if report.truncated else EXIT_OK


def _reports(cfg: RunConfig, required: bool):
    paths = cfg.parameters.get("inputs") or []
    if required and not paths:
        raise DomainError(f"experiment {cfg.parameters['name']!r} needs --in <report.json>")
    return [read_report(Path(x)) for x in paths]


def _exp_zero_asymptotics(cfg, consts):
    table = _table(cfg.parameters.get("table"), 10_020)
    return [ex.zero_asymptotics(table), ex.gap_asymptotics(table)]


def _exp_cube(cfg, consts):
    return [ex.cube_tiling_check(seed=cfg.seed)]


def _exp_packing(cfg, consts):
    reports = _reports(cfg, True)
    table = ex.archive_table(reports)
    return [ex.packing_check(c, table) for c in ex.pooled_configs(reports) if c.certified]


def _exp_sweeps(cfg, consts):
    ladder = cfg.parameters.get("R") or list(ex.ANGLE_LADDER)
    table = _table(cfg.parameters.get("table"), 2 * max(ladder) + 20)
    out = []
    for R in ladder:
        triples = ex.constructed_triples(R, table)
        out.append(ex.angle_sweep(triples, R))
        out.append(ex.strip_sweep(triples, R, consts.get(f"strip_min_R{int(R)}")))
    return out


def _exp_asymptote(cfg, consts):
    reports = _reports(cfg, False)
    if reports:
        return [ex.asymptote_scaling(ex.pooled_configs(reports)),
                ex.b_range_stats(ex.pooled_configs(reports))]
    table = _table(cfg.parameters.get("table"), 3 * max(ex.DELTA_LADDER) ** 1.5 + 25)
    sets = [[(-d, 0.0), (d, 0.0)] + ex.synthetic_hyperbola_points(d, table) for d in ex.DELTA_LADDER]
    return [ex.asymptote_scaling(sets), ex.b_range_stats(sets)]


def _exp_gap_count(cfg, consts):
    out = []
    for c in ex.pooled_configs(_reports(cfg, True)):
        for R in cfg.parameters.get("R") or ex.r_ladder(c.points):
            rec = ex.gap_count_check(c, R, consts["gap_count_c_fit"])
            rec.parameters["constants_version"] = consts["version"]
            out.append(rec)
    return out


def _exp_theorem(cfg, consts):
    return ex.theorem_scaling_check(_reports(cfg, True), consts)


def _exp_all(cfg, consts):
    out = _exp_zero_asymptotics(cfg, consts) + _exp_cube(cfg, consts) + _exp_sweeps(cfg, consts)
    out += _exp_asymptote(cfg, consts)
    if cfg.parameters.get("inputs"):
        out += _exp_gap_count(cfg, consts) + _exp_theorem(cfg, consts) + _exp_packing(cfg, consts)
    return out


EXPERIMENTS = {
    "zero_asymptotics": _exp_zero_asymptotics,
    "cube_tiling": _exp_cube,
    "packing": _exp_packing,
    "sweeps": _exp_sweeps,
    "asymptote_scaling": _exp_asymptote,
    "gap_count": _exp_gap_count,
    "theorem_scaling": _exp_theorem,
    "all": _exp_all,
    "calibrate": None,
}


def cmd_experiment(cfg: RunConfig) -> int:
    p = cfg.parameters
    if p["name"] == "calibrate":
        ex.write_constants(_resolve_out(p.get("out"), "constants.txt"), ex.calibrate())
        return EXIT_OK
    consts = ex.load_constants(Path(p["constants"]) if p.get("constants") else None)
    records = EXPERIMENTS[p["name"]](cfg, consts)
    out = p.get("out")
    if out is not None and out.endswith(".json"):
        Path(out).write_text(json.dumps({"run_config": cfg.header(),
                                         "records": records_to_json(records)}, sort_keys=True) + "\n")
        return EXIT_OK
    with _output(out, f"{p['name']}.csv") as fh:
        write_records(records, fh, cfg.header())
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    p = cfg.parameters
    consts = ex.load_constants(Path(p["constants"]) if p.get("constants") else None)
    records = []
    for path in p.get("inputs", []):
        try:
            recs = read_records(Path(path))
        except DiskSpecError as exc:
            raise type(exc)(f"{path}: {exc}") from exc
        for rec in recs:
            rec.passed = ex.recheck(rec, consts)
        records += recs
    summary: dict[str, dict] = {}
    for rec in records:
        row = summary.setdefault(rec.experiment_id, {"records": 0, "passed": 0, "failed": 0})
        row["records"] += 1
        row["passed" if rec.passed else "failed"] += 1
    doc = {"run_config": cfg.header(), "constants_version": consts["version"],
           "all_passed": all(r.passed for r in records), "summary": summary,
           "records": records_to_json(records)}
    out = p.get("out")
    if out is not None:
        Path(out).write_text(json.dumps(doc, sort_keys=True) + "\n")
    lines = [f"{'experiment':<20} {'records':>8} {'passed':>7} {'failed':>7}"]
    for name in sorted(summary):
        row = summary[name]
        lines.append(f"{name:<20} {row['records']:>8} {row['passed']:>7} {row['failed']:>7}")
    sys.stdout.write("\n".join(lines) + "\n")
    if out is None:
        sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    return EXIT_OK


COMMANDS = {"zeros": cmd_zeros, "verify": cmd_verify, "search": cmd_search,
            "experiment": cmd_experiment, "report": cmd_report}


def parse_config(argv: Sequence[str]) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    sub = args.pop("subcommand")
    seed = args.get("seed", 0)
    return RunConfig(sub, args, seed, args.get("out"))


def _fail(code: int, exc: BaseException) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def run(config: RunConfig) -> int:
    try:
        return COMMANDS[config.subcommand](config)
    except (DiskSpecError, ValueError, ArithmeticError) as exc:
        return _fail(EXIT_DOMAIN, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except DiskSpecError as exc:
        return _fail(EXIT_DOMAIN, exc)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
