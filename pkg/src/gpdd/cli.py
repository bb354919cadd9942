"""Command-line harness: ``gpdd {basis,sweep,verify} --config FILE``.

Exit codes
----------
0  success
1  usage or configuration error (bad flag, unknown measure kind, invalid field)
2  numerical failure (singular Gram matrix, failed block solve, moment out of range)
3  verification failure (some ``verify`` check failed)

Outputs, all under ``--out`` (default from the config, else ``results``):

``basis``   ``basis.txt`` (one section per subset, one line per standardised
            polynomial) and ``basis.json``.
``sweep``   ``sweep.csv`` with columns ``method,S,m_or_p,rel_error,coeff_count,
            residual,wall_ms``; ``sweep.json`` with the same rows plus errors; and
            ``expansions/<method>_<S>_<m>.json`` per row in the expansion schema.
            ``S`` is empty for GPCE rows, ``m_or_p`` holds ``m`` or ``p``.
            ``residual`` is the largest relative residual of the degree-block
            solves (0 for GPCE, which needs no solve). Everything except
            ``wall_ms`` is identical for identical inputs.
``verify``  ``verify.json`` and one line per check on stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config, validate
from .expansion import exact_variance, expand, to_dict, variance_of_approx
from .gpce import gpce_expand
from .measure import MomentRangeError, measure_from_spec
from .multiindex import enumerate_subsets
from .orthopoly import BasisConstructionError, build_basis
from .polynomial import Polynomial
from .properties import FAIL, run_suite

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
CSV_COLUMNS = ("method", "S", "m_or_p", "rel_error", "coeff_count", "residual", "wall_ms")
NUMERIC_ERRORS = (BasisConstructionError, ArithmeticError, MomentRangeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gpdd", description="Polynomial dimensional decomposition experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "basis": "emit standardised orthogonal polynomials per subset",
        "sweep": "GPDD and GPCE error sweep over truncations",
        "verify": "property and oracle checks",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="YAML/JSON experiment file")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="random seed, a non-negative integer (overrides config)")
        p.add_argument("--precision", choices=("double", "extended"), help="double floats or exact rationals")
        p.add_argument("--jobs", type=int, help="worker count for rows and degree blocks")
    return parser


def _apply_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.out is not None:
        cfg.out = args.out
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError(f"seed: must fit in an unsigned 64-bit integer, got {args.seed}")
        cfg.seed = args.seed
    if args.precision is not None:
        cfg.precision = args.precision
    if args.jobs is not None:
        cfg.jobs = args.jobs
    return cfg


def _fmt(c) -> float:
    return float(f"{float(c):.12g}")


def _subsets(cfg: ExperimentConfig, N: int):
    if cfg.basis.subsets is not None:
        return [tuple(int(v) for v in (u if isinstance(u, (list, tuple)) else [u])) for u in cfg.basis.subsets]
    return enumerate_subsets(N, cfg.basis.max_cardinality or N)


def cmd_basis(cfg: ExperimentConfig, measure, out: Path) -> int:
    lines, records = [], []
    for u in _subsets(cfg, measure.dim):
        basis = build_basis(measure, u, cfg.basis.max_degree, cfg.basis.form)
        lines.append(f"[subset {','.join(map(str, u))}]")
        for j in basis.indices():
            psi = basis.psi[j].map_coefficients(_fmt)
            name = f"Psi{{{','.join(map(str, u))}}}{''.join(map(str, j))}"
            lines.append(f"{name} = {psi.to_text()}")
            rec = {"subset": list(u), "index": list(j), "psi": psi.to_text()}
            if measure.exact:
                rec["unnormalised"] = basis.P[j].to_text()
                rec["norm2"] = str(basis.norm2[j])
                lines.append(f"  exact: ({rec['unnormalised']}) / sqrt({rec['norm2']})")
            records.append(rec)
        lines.append("")
    text = "\n".join(lines)
    print(text, end="")
    out.mkdir(parents=True, exist_ok=True)
    (out / "basis.txt").write_text(text)
    payload = {"measure": measure.to_spec(), "form": cfg.basis.form, "max_degree": cfg.basis.max_degree, "polynomials": records}
    (out / "basis.json").write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def sweep_tasks(cfg: ExperimentConfig) -> list[tuple]:
    """Rows in output order: GPDD by (S, m), then GPCE by p."""
    tasks = [("gpdd", S, m) for S in cfg.sweep.S for m in cfg.sweep.m if m >= S]
    tasks += [("gpce", None, p) for p in cfg.sweep.p]
    return tasks


def run_row(measure_spec: dict, precision: str, function: str, form: str, task: tuple, jobs: int = 1) -> dict:
    """One sweep row. Self-contained so it can run in a worker process."""
    method, S, order = task
    measure = measure_from_spec(measure_spec).with_precision(precision)
    y = Polynomial.parse(function, exact=precision == "extended")
    row = {"method": method, "S": S, "m_or_p": order, "error": None, "expansion": None}
    t0 = time.perf_counter()
    try:
        var = exact_variance(y, measure)
        if method == "gpdd":
            e = expand(y, measure, S, order, form=form, jobs=jobs)
            approx = variance_of_approx(e)
            residual = max((blk.residual for blk in e.blocks.values()), default=0.0)
        else:
            e = gpce_expand(y, measure, order)
            approx = e.variance
            residual = 0.0
        row["rel_error"] = float(abs(var - approx) / var)
        row["coeff_count"] = e.n_coefficients
        row["residual"] = float(residual)
        row["expansion"] = to_dict(e)
    except NUMERIC_ERRORS as err:
        row.update(rel_error=float("nan"), coeff_count=None, residual=None, error=f"{type(err).__name__}: {err}")
    row["wall_ms"] = (time.perf_counter() - t0) * 1e3
    return row


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(
            [
                r["method"],
                "" if r["S"] is None else r["S"],
                r["m_or_p"],
                repr(r["rel_error"]),
                "" if r["coeff_count"] is None else r["coeff_count"],
                "" if r["residual"] is None else repr(r["residual"]),
                f"{r['wall_ms']:.3f}",
            ]
        )
    return buf.getvalue()


def cmd_sweep(cfg: ExperimentConfig, measure, out: Path) -> int:
    tasks = sweep_tasks(cfg)
    if tasks and cfg.function is None:
        raise ConfigError("function: required for a sweep")
    args = (measure.to_spec(), cfg.precision, str(cfg.function), cfg.sweep.form)
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(run_row, *args, t) for t in tasks]
            rows = [f.result() for f in futures]
    else:
        rows = [run_row(*args, t, jobs=cfg.jobs) for t in tasks]
    out.mkdir(parents=True, exist_ok=True)
    text = _csv_text(rows)
    (out / "sweep.csv").write_text(text)
    print(text, end="")
    exp_dir = out / "expansions"
    summary = []
    for r in rows:
        exp = r.pop("expansion")
        if exp is not None:
            exp_dir.mkdir(exist_ok=True)
            tag = f"{r['method']}_S{r['S']}_m{r['m_or_p']}" if r["method"] == "gpdd" else f"gpce_p{r['m_or_p']}"
            (exp_dir / f"{tag}.json").write_text(json.dumps(exp, indent=2) + "\n")
        summary.append(r)
    payload = {"function": cfg.function, "precision": cfg.precision, "seed": cfg.seed, "rows": summary}
    (out / "sweep.json").write_text(json.dumps(payload, indent=2) + "\n")
    failed = [r for r in rows if r["error"]]
    for r in failed:
        print(f"row {r['method']} S={r['S']} order={r['m_or_p']} failed: {r['error']}", file=sys.stderr)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_verify(cfg: ExperimentConfig, measure, out: Path) -> int:
    v = cfg.verify
    checks = run_suite(
        measure,
        cfg.polynomial(),
        max_degree=v.max_degree,
        max_cardinality=v.max_cardinality,
        form=v.form,
        mc_samples=v.mc_samples,
        mc_min_samples=v.mc_min_samples,
        quadrature=v.quadrature,
        seed=cfg.seed,
        jobs=cfg.jobs,
    )
    report = measure.validate_assumptions()
    for line in report.lines():
        print(f"assumption   {line}")
    for c in checks:
        print(c.line())
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "measure": measure.to_spec(),
        "seed": cfg.seed,
        "assumptions": {"items": report.items, "notes": report.notes},
        "checks": [c.to_dict() for c in checks],
    }
    (out / "verify.json").write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_VERIFY if any(c.status == FAIL for c in checks) else EXIT_OK


COMMANDS = {"basis": cmd_basis, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_flags(load_config(args.config), args)
        measure = validate(cfg)
        return COMMANDS[args.command](cfg, measure, Path(cfg.out))
    except ConfigError as err:
        print(f"gpdd: config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as err:
        print(f"gpdd: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
