"""Command line front end.

    degenheat <check|solve|verify|sweep> --spec FILE [--out DIR]
              [--format csv|json] [--tol X] [--rho-min X]
              [--duhamel-form paper|corrected] [--eps-split X]
              [--grid T0:T1:NT,X0:X1:NX]

Exit status: 0 all reports pass, 1 a check failed, 2 numeric failure,
3 input error. Errors are reported as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .coefficients import check_conditions, lemma_report
from .errors import DegenheatError, DomainError, DomainTooSmallError, SpecParseError
from .solver import GridSpec, ProblemSpec, solve_grid
from .spec_io import make_grid, parse_range, parse_spec, serialize_spec
from .verify import (
    ManufacturedInitial,
    ManufacturedSource,
    cn_oracle,
    compare_fields,
    exact_field,
    exact_solution_field,
    initial_check,
    residual_patches,
)

EXIT_PASS, EXIT_CHECK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2, 3
COMMANDS = ("check", "solve", "verify", "sweep")

RESIDUAL_TOL = 1e-3
EXACT_TOL = 1e-5
ORACLE_DT = 1e-3
ORACLE_DX = 0.02
CONDITION_SAMPLES = 1024


@dataclass(frozen=True)
class RunConfig:
    command: str
    spec: Path
    out: Path = Path(".")
    format: str = "csv"
    grid: Optional[str] = None
    tol: Optional[float] = None
    rho_min: Optional[float] = None
    eps_split: Optional[float] = None
    duhamel_form: Optional[str] = None


# --------------------------------------------------------------------------
# output


def num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(format(v, ".17g")) if math.isfinite(v) else None
    if isinstance(v, complex):
        return [_jsonable(v.real), _jsonable(v.imag)]
    return v


def _write_table(path: Path, columns, rows, header_lines=()):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n" if line else "#\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([c if isinstance(c, str) else num(c) for c in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _write_json(path: Path, payload):
    path.write_text(json.dumps(_jsonable(payload), indent=1) + "\n", encoding="utf-8")


def _header(cfg: RunConfig, problem: ProblemSpec, grid: GridSpec) -> dict:
    return {
        "program": f"degenheat {__version__}",
        "command": cfg.command,
        "spec": serialize_spec(problem, grid),
    }


def _header_lines(header: dict):
    yield f"program = {header['program']}"
    yield f"command = {header['command']}"
    for line in header["spec"].rstrip("\n").split("\n"):
        yield line


# --------------------------------------------------------------------------
# commands


def _check(cfg, problem, grid):
    cond = check_conditions(problem.coefficient, float(grid.t1), CONDITION_SAMPLES)
    lemmas = None
    if cond.nonvanishing_ok and cond.continuous_ok:
        taus = [0.0] + [float(t) for t in grid.times]
        pairs = [(float(t), tau) for t in grid.times for tau in taus if tau < t]
        lemmas = lemma_report(problem.omega_cache, pairs)
    passed = cond.passed and (lemmas is not None and lemmas.passed)

    header = _header(cfg, problem, grid)
    lemma_rows = lemmas.rows if lemmas is not None else []
    lemma_cols = ["lemma", "t", "tau", "re_H", "im_H", "abs_H", "arg_H", "delta_margin",
                  "lhs", "mid", "rhs", "identity_error", "mid_minus_rhs", "applicable", "note"]

    def lemma_values(r):
        return [r.lemma, r.t, r.tau, r.H.real, r.H.imag, r.abs_H, r.arg_H, r.delta_margin,
                r.lhs, r.mid, r.rhs, r.identity_error, r.mid_minus_rhs, r.applicable, r.note]

    cond_dict = cond.as_dict()
    summary = {
        "identity_ok": lemmas.identity_ok() if lemmas else False,
        "margins_ok": lemmas.margins_ok() if lemmas else False,
        "passed": passed,
    }
    if cfg.format == "json":
        _write_json(cfg.out / "conditions.json", {"header": header, "conditions": cond_dict,
                                                   "passed": cond.passed})
        _write_json(cfg.out / "lemmas.json", {
            "header": header, **summary,
            "rows": [dict(zip(lemma_cols, lemma_values(r))) for r in lemma_rows],
        })
    else:
        rows = []
        for key, value in cond_dict.items():
            if key == "positive_segments":
                value = " ".join(f"{num(a)}:{num(b)}" for a, b in value)
            rows.append([key, value if isinstance(value, str) else num(value)])
        _write_table(cfg.out / "conditions.csv", ["key", "value"], rows, _header_lines(header))
        _write_table(cfg.out / "lemmas.csv", lemma_cols, [lemma_values(r) for r in lemma_rows],
                     list(_header_lines(header)) + [f"{k} = {num(v)}" for k, v in summary.items()])
    return passed


def _field_rows(field):
    for i, t in enumerate(field.t_grid):
        for j, x in enumerate(field.x_grid):
            u = field.values[i, j]
            yield [t, x, u.real, u.imag, abs(u)]


def _solve(cfg, problem, grid):
    field = solve_grid(problem, grid)
    header = _header(cfg, problem, grid)
    cols = ["t", "x", "re_u", "im_u", "abs_u"]
    if cfg.format == "json":
        _write_json(cfg.out / "field.json", {
            "header": header, "provenance": field.provenance,
            "records": [dict(zip(cols, r)) for r in _field_rows(field)],
        })
    else:
        _write_table(cfg.out / "field.csv", cols, _field_rows(field), _header_lines(header))
    return bool(np.all(np.isfinite(field.values)))


def _exact_for(problem):
    src, phi = problem.source, problem.phi
    if isinstance(src, ManufacturedSource) and isinstance(phi, ManufacturedInitial) \
            and (src.field_name, src.c) == (phi.field_name, phi.c):
        return exact_field(src.field_name, src.c)
    return None


def _sample(values, k):
    idx = np.unique(np.linspace(0, len(values) - 1, min(k, len(values))).round().astype(int))
    return [float(values[i]) for i in idx]


def _verify(cfg, problem, grid):
    scale = max(1.0, float(np.max(np.abs(problem.phi(grid.xs)))))
    checks = []

    res = residual_patches(problem, [float(t) for t in grid.times], _sample(grid.xs, 9))
    checks.append({"check": "residual", "metric": "sup_norm", "value": res.sup_norm,
                   "threshold": RESIDUAL_TOL * scale, "passed": res.sup_norm <= RESIDUAL_TOL * scale,
                   "detail": res.as_dict()})

    trace = initial_check(problem, [4.0 ** -k for k in range(1, 6)], grid.xs)
    checks.append({"check": "initial_trace", "metric": "final_over_first", "value": trace.ratio,
                   "threshold": 1e-2, "passed": trace.passed, "detail": trace.as_dict()})

    field = solve_grid(problem, grid)
    halfwidth = max(12.0, float(np.max(np.abs(grid.xs))) + 8.0)
    try:
        oracle = cn_oracle(problem, grid, halfwidth, ORACLE_DT, ORACLE_DX)
    except DomainTooSmallError as exc:
        checks.append({"check": "oracle", "metric": "sup_norm", "value": None, "threshold": None,
                       "passed": None, "detail": {"skipped": str(exc)}})
    else:
        sup, l2 = compare_fields(field, oracle)
        thr = max(1e-4, 10.0 * (ORACLE_DT ** 2 + ORACLE_DX ** 2) * scale)
        checks.append({"check": "oracle", "metric": "sup_norm", "value": sup, "threshold": thr,
                       "passed": sup <= thr, "detail": {"l2_norm": l2, **oracle.provenance}})

    ex = _exact_for(problem)
    if ex is not None:
        sup, l2 = compare_fields(field, exact_solution_field(ex, grid))
        checks.append({"check": "exact", "metric": "sup_norm", "value": sup,
                       "threshold": EXACT_TOL * scale, "passed": sup <= EXACT_TOL * scale,
                       "detail": {"l2_norm": l2, "field": ex.name}})

    passed = all(c["passed"] is not False for c in checks)
    header = _header(cfg, problem, grid)
    if cfg.format == "json":
        _write_json(cfg.out / "verify.json", {"header": header, "checks": checks, "passed": passed})
    else:
        rows = [[c["check"], c["metric"], num(c["value"]), num(c["threshold"]),
                 "skipped" if c["passed"] is None else num(c["passed"])] for c in checks]
        _write_table(cfg.out / "verify.csv", ["check", "metric", "value", "threshold", "passed"],
                     rows, _header_lines(header))
    return passed


def _sweep(cfg, problem, grid):
    tols = sorted({1e-6, 1e-8, problem.quad_tol}, reverse=True)
    coarse = GridSpec(grid.t0, grid.t1, grid.nt, grid.x0, grid.x1, max(1, grid.nx // 2 + 1))
    ex = _exact_for(problem)
    rows = []
    for g in (coarse, grid):
        if ex is not None:
            ref, ref_name = exact_solution_field(ex, g), f"exact:{ex.name}"
        else:
            ref_tol = 1e-2 * min(tols)
            ref = solve_grid(dataclasses.replace(problem, quad_tol=ref_tol), g)
            ref_name = f"quad_tol={num(ref_tol)}"
        for tol in tols:
            field = solve_grid(dataclasses.replace(problem, quad_tol=tol), g)
            sup, l2 = compare_fields(field, ref)
            rows.append([tol, g.nt, g.nx, field.evaluations, sup, l2, ref_name])
    passed = all(math.isfinite(r[4]) for r in rows)
    cols = ["quad_tol", "nt", "nx", "evaluations", "sup_error", "l2_error", "reference"]
    header = _header(cfg, problem, grid)
    if cfg.format == "json":
        _write_json(cfg.out / "sweep.json", {"header": header, "passed": passed,
                                             "rows": [dict(zip(cols, r)) for r in rows]})
    else:
        _write_table(cfg.out / "sweep.csv", cols, rows, _header_lines(header))
    return passed


_RUNNERS = {"check": _check, "solve": _solve, "verify": _verify, "sweep": _sweep}


def parse_grid_override(text: str) -> GridSpec:
    parts = text.split(",")
    if len(parts) != 2:
        raise SpecParseError(f"expected T0:T1:NT,X0:X1:NX, got {text!r}", "--grid")
    return make_grid(parse_range(parts[0], "--grid"), parse_range(parts[1], "--grid"))


def load(cfg: RunConfig) -> tuple[ProblemSpec, GridSpec]:
    problem, grid = parse_spec(cfg.spec)
    if cfg.grid:
        grid = parse_grid_override(cfg.grid)
    overrides = {}
    if cfg.tol is not None:
        overrides["quad_tol"] = cfg.tol
    if cfg.rho_min is not None:
        overrides["rho_min"] = cfg.rho_min
    if cfg.eps_split is not None:
        overrides["eps_split"] = cfg.eps_split
    if cfg.duhamel_form is not None:
        overrides["duhamel_form"] = cfg.duhamel_form
    if overrides:
        try:
            problem = dataclasses.replace(problem, **overrides)
        except DomainError as exc:
            raise SpecParseError(str(exc), "overrides") from None
    return problem, grid


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the exit status."""
    try:
        problem, grid = load(cfg)
        cfg.out.mkdir(parents=True, exist_ok=True)
        passed = _RUNNERS[cfg.command](cfg, problem, grid)
    except (SpecParseError, DomainError) as exc:
        _error_record(exc, EXIT_INPUT)
        return EXIT_INPUT
    except DegenheatError as exc:
        _error_record(exc, EXIT_NUMERIC)
        return EXIT_NUMERIC
    return EXIT_PASS if passed else EXIT_CHECK


def _error_record(exc: Exception, status: int) -> None:
    record = {"status": status, "error": type(exc).__name__, "message": str(exc)}
    for attr in ("key", "t", "tau", "point"):
        value = getattr(exc, attr, None)
        if value is not None:
            record[attr] = _jsonable(value)
    sys.stderr.write(json.dumps(record) + "\n")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(json.dumps({"status": EXIT_INPUT, "error": "UsageError",
                                     "message": message}) + "\n")
        sys.exit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="degenheat",
        description="Kernel solver and checks for p(t) u_t = u_xx + f with complex p.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--spec", required=True, type=Path, help="problem-spec file")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--tol", type=float, help="quadrature tolerance")
    parser.add_argument("--rho-min", type=float, help="floor on Re omega")
    parser.add_argument("--duhamel-form", choices=("paper", "corrected"))
    parser.add_argument("--eps-split", type=float, help="width of the last Duhamel slice")
    parser.add_argument("--grid", help="T0:T1:NT,X0:X1:NX")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=args.command, spec=args.spec, out=args.out, format=args.format, grid=args.grid,
        tol=args.tol, rho_min=args.rho_min, eps_split=args.eps_split,
        duhamel_form=args.duhamel_form,
    )
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
