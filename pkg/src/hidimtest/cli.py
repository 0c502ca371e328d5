"""Command-line front end.

Four subcommands: ``test`` runs one covariance-identity test on a data
file, ``simulate`` runs a configured Monte Carlo experiment, ``rmt-verify``
checks the contour and density identities against their closed forms, and
``report`` renders a result file as grouped tables (optionally with
figures).

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical
degeneracy, 5 verification failure.  Every error path prints a single
stderr line of the form ``error[category]: message``.
"""

from __future__ import annotations

import argparse
import csv as csv_module
import io
import json
import os
import re
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .asymptotics import clrt_centering, run_test
from .covstats import DataMatrix, StatisticKind
from .errors import (
    ContourTooClose,
    DataError,
    DegenerateRatio,
    ExperimentError,
    NonConvergent,
    QuadratureError,
    SingularCovariance,
)
from .harness import (
    DeltaPolicy,
    ExperimentConfig,
    export,
    import_result,
    run_delta_sweep,
    run_experiment,
)
from .rmt import clrt_mp_integral, verify_identities

__all__ = ["main", "entry_point", "build_parser"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_VERIFY = 5

_TEST_CHOICES = ("new-clrt", "new-lw", "legacy-clrt", "legacy-lw")
_SEED_ENV = "HIDIMTEST_SEED"


class UsageError(Exception):
    """Invocation is syntactically valid but semantically inconsistent."""


def _fail(category: str, message: str) -> None:
    flat = " ; ".join(str(message).splitlines()) or "unknown error"
    print(f"error[{category}]: {flat}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Data loading

def _read_text(path) -> str:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"{path}: no such file")
    try:
        return p.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: unreadable: {exc}") from exc


def _parse_matrix(path) -> np.ndarray:
    """Delimiter-sniffed CSV/TSV (or whitespace) matrix of finite reals."""
    text = _read_text(path)
    if not text.strip():
        raise DataError(f"{path}: empty data file")
    first_line = text.lstrip("\n").splitlines()[0]
    counts = {d: first_line.count(d) for d in (",", "\t", ";")}
    best = max(counts, key=counts.get)
    delimiter = best if counts[best] > 0 else None  # None: whitespace
    try:
        arr = np.loadtxt(io.StringIO(text), delimiter=delimiter,
                         dtype=float, ndmin=2)
    except ValueError as exc:
        raise DataError(f"{path}: could not parse a numeric matrix: {exc}") from exc
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{path}: matrix contains non-finite entries")
    return arr


def _load_data(path, orientation: str) -> DataMatrix:
    arr = _parse_matrix(path)
    try:
        if orientation == "rows":
            return DataMatrix.from_observation_rows(arr)
        return DataMatrix(arr)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _load_mean_vector(path, p: int) -> np.ndarray:
    vec = _parse_matrix(path).reshape(-1)
    if vec.size != p:
        raise DataError(
            f"{path}: mean vector has {vec.size} entries, data has p={p}"
        )
    return vec


# ---------------------------------------------------------------------------
# test

def _cmd_test(args) -> int:
    kind = StatisticKind(args.test.replace("-", "_"))
    data = _load_data(args.data, args.orientation)
    if kind is StatisticKind.LEGACY_CLRT:
        if args.mu == "sample":
            raise UsageError(
                "legacy-clrt assumes a known population mean; "
                "pass --mu zero or --mu FILE"
            )
        mu = None if args.mu == "zero" else _load_mean_vector(args.mu, data.p)
    else:
        if args.mu != "sample":
            raise UsageError(
                "--mu zero/FILE applies only to legacy-clrt; "
                f"{args.test} centers with the sample mean"
            )
        mu = None
    try:
        report = run_test(data, kind, alpha=args.alpha, delta=args.delta,
                          mu=mu)
    except SingularCovariance as exc:
        hint = ""
        if data.p >= data.n - 1:
            hint = (f" (p={data.p}, n={data.n}: the log-determinant needs "
                    "p < n; the trace-based --test new-lw stays valid for "
                    "any p/n)")
        raise SingularCovariance(f"{exc}{hint}") from exc
    lines = [
        f"test: {report.statistic.statistic_kind.value}",
        f"p: {report.p}",
        f"n: {report.n}",
        f"y_n: {report.y_n!r}",
        f"delta: {report.delta!r}",
        f"statistic: {report.statistic.raw!r}",
        f"z_score: {report.z_score!r}",
        f"p_value: {report.p_value!r}",
        f"alpha: {report.alpha!r}",
        f"decision: {'reject' if report.reject else 'fail-to-reject'}",
    ]
    print("\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

def _bundled_config_names() -> list:
    folder = resources.files("hidimtest").joinpath("configs")
    return sorted(item.name[:-5] for item in folder.iterdir()
                  if item.name.endswith(".json"))


def _resolve_config(name_or_path: str) -> tuple:
    path = Path(name_or_path)
    if path.is_file():
        text = _read_text(path)
        stem = path.stem
    elif re.fullmatch(r"[A-Za-z0-9_\-]+", name_or_path):
        res = resources.files("hidimtest").joinpath(
            "configs", f"{name_or_path}.json")
        if not res.is_file():
            raise DataError(
                f"unknown config {name_or_path!r}; bundled configs: "
                + ", ".join(_bundled_config_names())
            )
        text = res.read_text(encoding="utf-8")
        stem = name_or_path
    else:
        raise DataError(f"{name_or_path}: no such config file")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{name_or_path}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataError(f"{name_or_path}: config must be a JSON object")
    return payload, stem


def _seed_override() -> int | None:
    raw = os.environ.get(_SEED_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(
            f"{_SEED_ENV} must be an integer, got {raw!r}"
        ) from None


def _run_sweep_config(payload: dict, jobs: int):
    spec = dict(payload)
    gammas = spec.pop("sweep_gammas")
    known = {
        "p": 50, "n": 100, "alpha": 0.05, "replications": 10_000,
        "master_seed": 0,
    }
    kwargs = {key: type(default)(spec.pop(key, default))
              for key, default in known.items()}
    if spec:
        raise DataError(f"unexpected sweep config fields {sorted(spec)}")
    if not gammas:
        raise DataError("sweep config needs a nonempty 'sweep_gammas' list")
    return run_delta_sweep([float(g) for g in gammas], jobs=jobs, **kwargs)


def _summary_table(rows) -> str:
    header = ["test", "p", "n", "y_n", "delta", "rate", "mc_se"]
    body = [[row.test, str(row.p), str(row.n), f"{row.y_n:g}",
             f"{row.delta:.4g}", f"{row.rate:.4f}", f"{row.mc_se:.4f}"]
            for row in rows]
    widths = [max(len(line[i]) for line in [header] + body)
              for i in range(len(header))]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    return "\n".join(fmt.format(*line) for line in [header] + body)


def _cmd_simulate(args) -> int:
    payload, stem = _resolve_config(args.config)
    seed = _seed_override()
    if seed is not None:
        payload = dict(payload, master_seed=seed)
    fmt = args.format
    if fmt is None:
        fmt = "jsonl" if args.out and str(args.out).endswith(".jsonl") else "csv"
    out = Path(args.out) if args.out else Path(f"{stem}.{fmt}")
    if "sweep_gammas" in payload:
        try:
            result = _run_sweep_config(payload, args.jobs)
        except (ValueError, KeyError, TypeError) as exc:
            raise DataError(f"{args.config}: invalid sweep config: {exc}") from exc
    else:
        try:
            cfg = ExperimentConfig.from_dict(payload)
        except (ValueError, TypeError) as exc:
            raise DataError(f"{args.config}: invalid config: {exc}") from exc
        result = run_experiment(cfg, jobs=args.jobs)
    export(result, out, fmt)
    print(_summary_table(result.rows))
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# rmt-verify

def _cmd_rmt_verify(args) -> int:
    for y in args.y:
        if not 0.0 < y < 1.0:
            raise UsageError(f"--y values must lie strictly in (0,1), got {y:g}")
    if args.tol <= 0:
        raise UsageError(f"--tol must be positive, got {args.tol:g}")
    records = verify_identities(args.y, args.delta, tol=args.tol)
    for y in args.y:
        record = {"identity": "mp_clrt_integral", "y": float(y), "delta": None}
        try:
            value = clrt_mp_integral(y)
            expected = clrt_centering(y)
            record.update(value=value, expected=expected,
                          abs_error=abs(value - expected),
                          passed=bool(abs(value - expected) <= args.tol),
                          error=None)
        except (QuadratureError, DegenerateRatio) as exc:
            record.update(value=None, expected=None, abs_error=None,
                          passed=False, error=str(exc))
        records.append(record)

    header = f"{'identity':<16} {'y':>5} {'delta':>6} {'quadrature':>22} " \
             f"{'closed form':>22} {'|diff|':>10} status"
    print(header)
    print("-" * len(header))
    failures = 0
    for rec in records:
        delta_text = "" if rec["delta"] is None else f"{rec['delta']:g}"
        if rec["error"] is not None:
            line = (f"{rec['identity']:<16} {rec['y']:>5g} {delta_text:>6} "
                    f"{'-':>22} {'-':>22} {'-':>10} FAIL ({rec['error']})")
            failures += 1
        else:
            status = "ok" if rec["passed"] else "FAIL"
            failures += 0 if rec["passed"] else 1
            line = (f"{rec['identity']:<16} {rec['y']:>5g} {delta_text:>6} "
                    f"{rec['value']:>22.15g} {rec['expected']:>22.15g} "
                    f"{rec['abs_error']:>10.2e} {status}")
        print(line)
    total = len(records)
    if failures:
        print(f"{failures} of {total} checks failed at tolerance {args.tol:g}")
        _fail("verify", f"{failures} of {total} identity checks failed")
        return EXIT_VERIFY
    print(f"all {total} checks passed at tolerance {args.tol:g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report

def _group_label(row) -> str:
    if row.cov or row.dist:
        return f"cov={row.cov or 'unknown'}, dist={row.dist}"
    return f"config={row.config_hash}"


def _is_sweep_result(rows) -> bool:
    return (len({row.delta for row in rows}) > 1
            and len({(row.p, row.n) for row in rows}) == 1
            and len({row.test for row in rows}) == 1)


def _render_markdown(rows) -> str:
    if _is_sweep_result(rows):
        lines = [f"## size sweep over the entry fourth moment "
                 f"(p={rows[0].p}, n={rows[0].n}, test={rows[0].test})", ""]
        lines.append("| delta | dist | rate | mc_se |")
        lines.append("|---|---|---|---|")
        for row in sorted(rows, key=lambda r: r.delta):
            lines.append(f"| {row.delta:.4g} | {row.dist} | {row.rate:.4f} "
                         f"| {row.mc_se:.4f} |")
        return "\n".join(lines)
    groups: dict = {}
    for row in rows:
        groups.setdefault((_group_label(row), row.test), []).append(row)
    blocks = []
    for (label, test), grp in sorted(groups.items()):
        ys = sorted({round(r.y_n, 10) for r in grp})
        ns = sorted({r.n for r in grp})
        cell = {(r.n, round(r.y_n, 10)): r.rate for r in grp}
        lines = [f"## {label} — test={test}", ""]
        lines.append("| n | " + " | ".join(f"y={y:g}" for y in ys) + " |")
        lines.append("|---|" + "---|" * len(ys))
        for n in ns:
            rates = [f"{cell[(n, y)]:.4f}" if (n, y) in cell else "—"
                     for y in ys]
            lines.append(f"| {n} | " + " | ".join(rates) + " |")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def _render_csv(rows) -> str:
    buffer = io.StringIO()
    writer = csv_module.writer(buffer, lineterminator="\n")
    writer.writerow(["cov", "dist", "test", "p", "n", "y_n", "delta",
                     "rate", "mc_se"])
    for row in sorted(rows, key=lambda r: (_group_label(r), r.test, r.n,
                                           r.y_n, r.delta)):
        writer.writerow([row.cov, row.dist, row.test, row.p, row.n,
                         repr(row.y_n), repr(row.delta), repr(row.rate),
                         repr(row.mc_se)])
    return buffer.getvalue().rstrip("\n")


def _cmd_report(args) -> int:
    try:
        result = import_result(args.result)
    except FileNotFoundError:
        raise DataError(f"{args.result}: no such file") from None
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if not result.rows:
        print("no rows in result file")
        return EXIT_OK
    text = (_render_markdown(result.rows) if args.format == "md"
            else _render_csv(result.rows))
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    if args.figures:
        from .plots import render_figures

        for path in render_figures(result.rows, args.figures):
            print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and dispatch

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hidimtest",
        description="High-dimensional covariance identity tests "
                    "(is the population covariance the identity matrix?)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser(
        "test", help="run one test on a delimited data file")
    p_test.add_argument("data", help="CSV/TSV matrix of finite reals")
    p_test.add_argument("--orientation", choices=("rows", "cols"),
                        default="rows",
                        help="rows: observations are file rows (default); "
                             "cols: variables are file rows")
    p_test.add_argument("--test", choices=_TEST_CHOICES, default="new-clrt")
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--delta", type=float, default=0.0,
                        help="excess kurtosis of the entries "
                             "(used by new-clrt and new-lw)")
    p_test.add_argument("--mu", default="sample",
                        help="'sample' (default), 'zero', or a file with a "
                             "known mean vector (legacy-clrt only)")
    p_test.set_defaults(func=_cmd_test)

    p_sim = sub.add_parser(
        "simulate", help="run a configured Monte Carlo experiment")
    p_sim.add_argument("config",
                       help="config file path or bundled config name")
    p_sim.add_argument("--out", default=None, help="output file path")
    p_sim.add_argument("--format", choices=("csv", "jsonl"), default=None,
                       help="output format (default: from --out suffix, "
                            "else csv)")
    p_sim.add_argument("--jobs", type=int, default=1,
                       help="worker processes for replications")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rmt = sub.add_parser(
        "rmt-verify",
        help="check contour/density identities against closed forms")
    p_rmt.add_argument("--y", type=float, nargs="+",
                       default=[0.1, 0.25, 0.5, 0.75, 0.9])
    p_rmt.add_argument("--delta", type=float, nargs="+",
                       default=[-1.2, 0.0, 1.5])
    p_rmt.add_argument("--tol", type=float, default=1e-6)
    p_rmt.set_defaults(func=_cmd_rmt_verify)

    p_rep = sub.add_parser(
        "report", help="render a result file as grouped tables")
    p_rep.add_argument("result", help="CSV or JSONL result file")
    p_rep.add_argument("--format", choices=("md", "csv"), default="md")
    p_rep.add_argument("--out", default=None,
                       help="write the table here instead of stdout")
    p_rep.add_argument("--figures", default=None, metavar="DIR",
                       help="also render PNG figures into DIR")
    p_rep.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        _fail("usage", str(exc))
        return EXIT_USAGE
    except DataError as exc:
        _fail("data", str(exc))
        return EXIT_DATA
    except (SingularCovariance, DegenerateRatio, ContourTooClose,
            NonConvergent, QuadratureError, ExperimentError) as exc:
        _fail("numeric", f"{type(exc).__name__}: {exc}")
        return EXIT_NUMERIC
    except ValueError as exc:
        _fail("data", str(exc))
        return EXIT_DATA
    except OSError as exc:
        _fail("data", str(exc))
        return EXIT_DATA


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
