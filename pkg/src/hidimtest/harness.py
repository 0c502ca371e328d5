"""Replicated Monte Carlo experiments: empirical size and power tables.

An experiment is a grid of (p, n) cells.  Within each cell, every
replication draws one dataset and evaluates every configured test kind on
that same dataset, so kinds can be compared replication by replication.
Each (cell, replication) pair owns a dedicated counter-based random
stream, and per-cell aggregates are assembled in replication order, which
makes the output bit-identical whatever the degree of parallelism.

The fourth-moment policy decides which excess kurtosis the corrected
statistics receive: ``known`` passes the generator's analytic value,
``assume_zero`` deliberately passes 0 (the classic misuse the corrected
laws exist to fix), and ``plug_in`` estimates it from each dataset.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, asdict

import numpy as np

from .asymptotics import run_test
from .covstats import StatisticKind, estimate_excess_kurtosis
from .datagen import CovarianceSpec, EntryDistribution, RngStream, RNG_ALGORITHM, synthesize
from .errors import ExperimentError, HidimtestError

__all__ = [
    "DeltaPolicy",
    "ExperimentConfig",
    "CellAggregate",
    "ExperimentResult",
    "run_experiment",
    "run_size_experiment",
    "run_power_experiment",
    "run_delta_sweep",
    "sweep_delta",
    "export",
    "import_result",
    "CSV_COLUMNS",
]

CSV_COLUMNS = [
    "test", "p", "n", "y_n", "dist", "delta", "alpha", "replications",
    "rejections", "rate", "mc_se", "seed", "config_hash",
]

DELTA_POLICIES = ("known", "assume_zero", "plug_in")


class DeltaPolicy:
    """Fourth-moment policies for the corrected statistics."""

    KNOWN = "known"
    ASSUME_ZERO = "assume_zero"
    PLUG_IN = "plug_in"


def _canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _normalize_kind(name) -> StatisticKind:
    if isinstance(name, StatisticKind):
        return name
    return StatisticKind(str(name).replace("-", "_"))


def _normalize_cell(item) -> tuple[int, int]:
    """Accept [p, n] pairs or {p|y, n} mappings; y resolves to round(y*n)."""
    if isinstance(item, dict):
        entry = dict(item)
        n = int(entry.pop("n"))
        if "p" in entry:
            p = int(entry.pop("p"))
        elif "y" in entry:
            p = int(round(float(entry.pop("y")) * n))
        else:
            raise ValueError(f"grid cell needs 'p' or 'y': {item!r}")
        if entry:
            raise ValueError(f"unexpected grid fields {sorted(entry)}")
    else:
        p, n = (int(v) for v in item)
    if p < 1 or n < 2:
        raise ValueError(f"grid cell needs p >= 1 and n >= 2, got (p={p}, n={n})")
    return p, n


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte Carlo experiment."""

    kinds: tuple
    dist: EntryDistribution
    cov: dict
    grid: tuple
    alpha: float = 0.05
    replications: int = 1000
    master_seed: int = 0
    delta_policy: str = DeltaPolicy.KNOWN
    mu: float | tuple = 0.0

    def __post_init__(self):
        kinds = tuple(_normalize_kind(k) for k in self.kinds)
        if not kinds:
            raise ValueError("at least one test kind is required")
        object.__setattr__(self, "kinds", kinds)
        grid = tuple(_normalize_cell(cell) for cell in self.grid)
        if not grid:
            raise ValueError("grid must be nonempty")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "cov", dict(self.cov))
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.replications < 100:
            raise ValueError(
                f"need at least 100 replications, got {self.replications}"
            )
        if self.delta_policy not in DELTA_POLICIES:
            raise ValueError(
                f"delta policy must be one of {DELTA_POLICIES}, "
                f"got {self.delta_policy!r}"
            )
        if np.ndim(self.mu) > 0:
            object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        else:
            object.__setattr__(self, "mu", float(self.mu))

    def cov_for(self, p: int) -> CovarianceSpec:
        return CovarianceSpec.from_dict(self.cov, p)

    def mu_vector(self, p: int):
        return self.mu if np.ndim(self.mu) == 0 else np.asarray(self.mu)

    def to_dict(self) -> dict:
        return {
            "tests": [k.value for k in self.kinds],
            "dist": self.dist.to_dict(),
            "cov": dict(self.cov),
            "mu": self.mu if np.ndim(self.mu) == 0 else list(self.mu),
            "grid": [[p, n] for p, n in self.grid],
            "alpha": self.alpha,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "delta_policy": self.delta_policy,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        try:
            cfg = cls(
                kinds=tuple(data.pop("tests")),
                dist=EntryDistribution.from_dict(data.pop("dist")),
                cov=dict(data.pop("cov", {"kind": "identity"})),
                grid=tuple(data.pop("grid")),
                alpha=float(data.pop("alpha", 0.05)),
                replications=int(data.pop("replications", 1000)),
                master_seed=int(data.pop("master_seed", 0)),
                delta_policy=str(data.pop("delta_policy", DeltaPolicy.KNOWN)),
                mu=data.pop("mu", 0.0),
            )
        except KeyError as exc:
            raise ValueError(f"config is missing required field {exc}") from exc
        if data:
            raise ValueError(f"unexpected config fields {sorted(data)}")
        return cfg

    def config_hash(self) -> str:
        digest = hashlib.sha256(_canonical_json(self.to_dict()).encode())
        return digest.hexdigest()[:12]


@dataclass(frozen=True)
class CellAggregate:
    """Rejection tally for one (grid cell, test kind) pair."""

    test: str
    p: int
    n: int
    y_n: float
    dist: str
    cov: str
    delta: float
    alpha: float
    replications: int
    rejections: int
    rate: float
    mc_se: float
    mean_z: float
    var_z: float
    seed: int
    config_hash: str

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0 or self.rejections > self.replications:
            raise ValueError("inconsistent rejection tally")

    def csv_row(self) -> list:
        return [getattr(self, col) for col in CSV_COLUMNS]


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregates for every cell plus provenance."""

    rows: tuple
    config: dict
    config_hash: str
    master_seed: int
    timestamp: str
    rng_algorithm: str = RNG_ALGORITHM


def _resolve_delta(policy: str, dist: EntryDistribution, values) -> float:
    if policy == DeltaPolicy.KNOWN:
        return dist.delta
    if policy == DeltaPolicy.ASSUME_ZERO:
        return 0.0
    return estimate_excess_kurtosis(values)


def _evaluate_chunk(config_dict: dict, cell_index: int, start: int,
                    stop: int) -> dict:
    """Run replications [start, stop) of one cell; used as the pool task.

    Returns, per test kind, the rejection flags, z-scores and the delta
    passed to the test, each indexed by replication offset.
    """
    cfg = ExperimentConfig.from_dict(config_dict)
    p, n = cfg.grid[cell_index]
    count = stop - start
    out = {
        kind.value: (np.zeros(count, dtype=bool), np.zeros(count),
                     np.zeros(count))
        for kind in cfg.kinds
    }
    try:
        cov_spec = cfg.cov_for(p)
        mu = cfg.mu_vector(p)
    except (ValueError, HidimtestError) as exc:
        raise ExperimentError(
            f"cell (p={p}, n={n}): invalid specification: {exc}"
        ) from exc
    for offset in range(count):
        rep = start + offset
        stream = RngStream(cfg.master_seed,
                           cell_index * cfg.replications + rep)
        try:
            X = synthesize(cfg.dist, cov_spec, mu, p, n, stream)
            delta = _resolve_delta(cfg.delta_policy, cfg.dist, X.values)
            for kind in cfg.kinds:
                report = run_test(X, kind, alpha=cfg.alpha, delta=delta)
                rejects, zs, deltas = out[kind.value]
                rejects[offset] = report.reject
                zs[offset] = report.z_score
                deltas[offset] = delta
        except HidimtestError as exc:
            raise ExperimentError(
                f"cell (p={p}, n={n}), replication {rep}: "
                f"{type(exc).__name__}: {exc}"
            ) from exc
    return out


def _chunk_ranges(replications: int, jobs: int) -> list:
    chunk = max(1, math.ceil(replications / (max(jobs, 1) * 4)))
    return [(s, min(s + chunk, replications))
            for s in range(0, replications, chunk)]


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Run every replication of every grid cell and aggregate rejections.

    ``jobs`` > 1 distributes replication chunks over worker processes; the
    result is identical to a serial run because every replication owns its
    stream and aggregates are assembled in replication order.
    """
    for p, _ in cfg.grid:  # surface covariance/dimension mismatches up front
        cfg.cov_for(p)
    config_dict = cfg.to_dict()
    reps = cfg.replications
    per_cell = {
        (ci, kind.value): (np.zeros(reps, dtype=bool), np.zeros(reps),
                           np.zeros(reps))
        for ci in range(len(cfg.grid)) for kind in cfg.kinds
    }

    def _store(ci: int, start: int, stop: int, chunk_out: dict) -> None:
        for kind_value, (rej, zs, ds) in chunk_out.items():
            full_rej, full_z, full_d = per_cell[(ci, kind_value)]
            full_rej[start:stop] = rej
            full_z[start:stop] = zs
            full_d[start:stop] = ds

    tasks = [(ci, start, stop)
             for ci in range(len(cfg.grid))
             for start, stop in _chunk_ranges(reps, jobs)]
    if jobs <= 1:
        for ci, start, stop in tasks:
            _store(ci, start, stop, _evaluate_chunk(config_dict, ci, start, stop))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(_evaluate_chunk, config_dict, ci, start, stop):
                (ci, start, stop)
                for ci, start, stop in tasks
            }
            for future in as_completed(futures):
                ci, start, stop = futures[future]
                _store(ci, start, stop, future.result())

    config_hash = cfg.config_hash()
    rows = []
    for ci, (p, n) in enumerate(cfg.grid):
        cov_label = cfg.cov_for(p).label
        for kind in cfg.kinds:
            rej, zs, ds = per_cell[(ci, kind.value)]
            rejections = int(np.sum(rej))
            rate = rejections / reps
            if kind in (StatisticKind.NEW_CLRT, StatisticKind.NEW_LW):
                delta_col = float(np.mean(ds))
            else:
                delta_col = 0.0
            rows.append(CellAggregate(
                test=kind.value, p=p, n=n, y_n=p / n,
                dist=cfg.dist.label, cov=cov_label, delta=delta_col,
                alpha=cfg.alpha, replications=reps, rejections=rejections,
                rate=rate, mc_se=math.sqrt(rate * (1.0 - rate) / reps),
                mean_z=float(np.mean(zs)), var_z=float(np.var(zs, ddof=1)),
                seed=cfg.master_seed, config_hash=config_hash,
            ))
    return ExperimentResult(
        rows=tuple(rows), config=config_dict, config_hash=config_hash,
        master_seed=cfg.master_seed,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )


def run_size_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Empirical size: requires the identity population covariance."""
    if not cfg.cov_for(cfg.grid[0][0]).is_identity:
        raise ValueError("size experiments require the identity covariance")
    return run_experiment(cfg, jobs=jobs)


def run_power_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Empirical power: requires a non-identity population covariance."""
    if cfg.cov_for(cfg.grid[0][0]).is_identity:
        raise ValueError("power experiments require a non-identity covariance")
    return run_experiment(cfg, jobs=jobs)


def run_delta_sweep(gamma_grid, p: int = 50, n: int = 100, alpha: float = 0.05,
                    replications: int = 10_000, master_seed: int = 0,
                    jobs: int = 1) -> ExperimentResult:
    """Size of the corrected trace test across two-point fourth moments.

    One size experiment per two-point weight gamma; every row reports the
    analytic excess kurtosis in its delta column, so the table doubles as
    (delta, size) pairs.
    """
    from .datagen import two_point

    rows = []
    configs = []
    for gamma in gamma_grid:
        cfg = ExperimentConfig(
            kinds=(StatisticKind.NEW_LW,), dist=two_point(float(gamma)),
            cov={"kind": "identity"}, grid=((p, n),), alpha=alpha,
            replications=replications, master_seed=master_seed,
            delta_policy=DeltaPolicy.KNOWN,
        )
        configs.append(cfg.to_dict())
        rows.extend(run_size_experiment(cfg, jobs=jobs).rows)
    sweep_spec = {"sweep": [float(g) for g in gamma_grid], "configs": configs}
    digest = hashlib.sha256(_canonical_json(sweep_spec).encode())
    return ExperimentResult(
        rows=tuple(rows), config=sweep_spec,
        config_hash=digest.hexdigest()[:12], master_seed=master_seed,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )


def sweep_delta(gamma_grid, p: int = 50, n: int = 100, alpha: float = 0.05,
                replications: int = 10_000, master_seed: int = 0,
                jobs: int = 1) -> list:
    """(excess kurtosis, empirical size) pairs over a two-point weight grid."""
    result = run_delta_sweep(gamma_grid, p=p, n=n, alpha=alpha,
                             replications=replications,
                             master_seed=master_seed, jobs=jobs)
    return [(row.delta, row.rate) for row in result.rows]


# ---------------------------------------------------------------------------
# Persistence

def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export(result: ExperimentResult, path, format: str = "csv") -> None:
    """Write one row per (cell, test kind).

    CSV carries exactly the documented 13 columns.  JSONL starts with a
    metadata object (config, hash, seed, rng algorithm, timestamp) and
    follows with one object per row carrying the CSV fields plus the
    covariance label and the z-score moments.
    """
    fmt = str(format).lower()
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in result.rows:
                writer.writerow([_csv_cell(v) for v in row.csv_row()])
    elif fmt == "jsonl":
        with open(path, "w", encoding="utf-8") as handle:
            meta = {
                "config": result.config,
                "config_hash": result.config_hash,
                "master_seed": result.master_seed,
                "rng_algorithm": result.rng_algorithm,
                "timestamp": result.timestamp,
            }
            handle.write(_canonical_json(meta) + "\n")
            for row in result.rows:
                handle.write(_canonical_json(asdict(row)) + "\n")
    else:
        raise ValueError(f"unknown export format {format!r} (csv or jsonl)")


_CSV_TYPES = {
    "p": int, "n": int, "y_n": float, "delta": float, "alpha": float,
    "replications": int, "rejections": int, "rate": float, "mc_se": float,
    "seed": int,
}


def import_result(path) -> ExperimentResult:
    """Re-read an exported result file (either format) into aggregates.

    CSV round-trips the 13 documented columns; fields absent from the CSV
    schema (covariance label, z-score moments, provenance beyond seed and
    hash) come back as their neutral defaults.
    """
    text = open(path, "r", encoding="utf-8").read()
    lines = text.splitlines()
    if not lines:
        raise ValueError(f"{path}: empty result file")
    if lines[0].startswith("{"):
        meta = json.loads(lines[0])
        rows = []
        for line in lines[1:]:
            if not line.strip():
                continue
            rows.append(CellAggregate(**json.loads(line)))
        return ExperimentResult(
            rows=tuple(rows), config=meta.get("config", {}),
            config_hash=meta.get("config_hash", ""),
            master_seed=int(meta.get("master_seed", 0)),
            timestamp=meta.get("timestamp", ""),
            rng_algorithm=meta.get("rng_algorithm", RNG_ALGORITHM),
        )
    reader = csv.reader(lines)
    header = next(reader)
    if header != CSV_COLUMNS:
        unexpected = [c for c in header if c not in CSV_COLUMNS]
        missing = [c for c in CSV_COLUMNS if c not in header]
        raise ValueError(
            f"{path}: header does not match the result schema "
            f"(missing {missing or 'none'}, unexpected {unexpected or 'none'})"
        )
    rows = []
    for record in reader:
        if not record:
            continue
        data = dict(zip(CSV_COLUMNS, record))
        typed = {key: _CSV_TYPES.get(key, str)(value)
                 for key, value in data.items()}
        rows.append(CellAggregate(cov="", mean_z=float("nan"),
                                  var_z=float("nan"), **typed))
    seed = rows[0].seed if rows else 0
    config_hash = rows[0].config_hash if rows else ""
    return ExperimentResult(rows=tuple(rows), config={},
                            config_hash=config_hash, master_seed=seed,
                            timestamp="")
