"""Replica orchestration: seed fans, parallel execution, reports on disk.

An experiment is a registered function mapping ``(p, steps, seed, **params)``
to metric rows ``(t, metric, value)``.  ``run_ensemble`` fans it out over a
grid of ``p`` values and replica seeds (replica ``r`` uses
``base_seed + r``), optionally across processes, and aggregates rows into
deterministic per ``(p, t, metric)`` summaries.  Replica failures are
captured per seed instead of aborting the batch.

Reports serialize to JSON under the schema tag ``glp-report/1``, with the
row data additionally available as CSV.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import community, process
from ._version import __version__
from .errors import BatchError, ConfigError, ParseError

__all__ = [
    "SCHEMA",
    "EXPERIMENTS",
    "EnsembleConfig",
    "MetricRow",
    "EnsembleReport",
    "run_ensemble",
    "write_report",
    "read_report",
    "write_rows_csv",
]

SCHEMA = "glp-report/1"


# ----------------------------------------------------------------------
# experiment registry


def _exp_maxdeg(p, steps, seed, snapshot_times=()):
    times = tuple(int(t) for t in snapshot_times) or (steps,)
    res = process.run(
        process.ProcessParams(p=p, steps=steps, seed=seed, snapshot_times=times)
    )
    return [(s.t, "max_degree", float(s.max_degree)) for s in res.snapshots]


def _exp_triangles(p, steps, seed, snapshot_times=()):
    times = tuple(int(t) for t in snapshot_times) or (steps,)
    res = process.run(process.ProcessParams(p=p, steps=steps, seed=seed))
    return [
        (t, "triangles", float(community.count_triangles(res.graph, at_time=t)))
        for t in times
    ]


def _exp_arrival(p, steps, seed, vertex=2):
    res = process.run(process.ProcessParams(p=p, steps=steps, seed=seed))
    return [(steps, f"arrival_time_{vertex}", float(res.graph.arrival_time(vertex)))]


def _exp_cliquegrowth(p, steps, seed, t_values=(), m=10, eps=0.1, eps_prime=0.05, topk=64):
    ts = tuple(int(t) for t in t_values) or (steps // 2,)
    if steps != 2 * max(ts):
        raise ConfigError("cliquegrowth needs steps == 2 * max(t_values)")
    rows = community.clique_growth_experiment(
        p, ts, seeds=1, base_seed=seed, m=m, eps=eps, eps_prime=eps_prime, topk=topk
    )
    out = []
    for r in rows:
        out.append((r.t, "pair_fraction", float(r.pair_fraction)))
        out.append((r.t, "clique_size", float(r.clique_size)))
        out.append((r.t, "topk_clique_size", float(r.topk_clique_size)))
    return out


EXPERIMENTS = {
    "maxdeg": _exp_maxdeg,
    "triangles": _exp_triangles,
    "arrival": _exp_arrival,
    "cliquegrowth": _exp_cliquegrowth,
}


# ----------------------------------------------------------------------
# configuration and report types


@dataclass(frozen=True)
class EnsembleConfig:
    experiment: str
    p_grid: tuple[float, ...]
    steps: int
    replicas: int
    base_seed: int = 0
    width: int = 1
    min_success: float = 1.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; "
                f"known: {sorted(EXPERIMENTS)}"
            )
        if not self.p_grid:
            raise ConfigError("empty p grid")
        if any(not (0.0 <= p <= 1.0) for p in self.p_grid):
            raise ConfigError(f"p grid outside [0, 1]: {self.p_grid}")
        if self.steps < 1 or self.replicas < 1 or self.width < 1:
            raise ConfigError("steps, replicas and width must be >= 1")
        if not (0.0 < self.min_success <= 1.0):
            raise ConfigError(f"min_success must lie in (0, 1], got {self.min_success}")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["p_grid"] = list(self.p_grid)
        d["params"] = {k: _jsonable(v) for k, v in sorted(self.params.items())}
        return d


def _jsonable(v):
    if isinstance(v, (tuple, list, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


@dataclass(frozen=True)
class MetricRow:
    p: float
    seed: int
    t: int
    metric: str
    value: float


@dataclass(frozen=True)
class EnsembleReport:
    schema: str
    version: str
    experiment: str
    config: dict
    rows: tuple[MetricRow, ...]
    failures: tuple[dict, ...]
    aggregates: tuple[dict, ...]

    @property
    def replica_count(self) -> int:
        return len(self.config["p_grid"]) * self.config["replicas"]

    @property
    def success_fraction(self) -> float:
        return 1.0 - len(self.failures) / self.replica_count

    def gate_passed(self) -> bool:
        return self.success_fraction >= self.config["min_success"]


# ----------------------------------------------------------------------
# execution


def _run_task(task):
    experiment, p, steps, seed, params = task
    fn = EXPERIMENTS[experiment]
    try:
        rows = fn(p, steps, seed, **params)
        return (p, seed, [(int(t), str(m), float(v)) for t, m, v in rows], None)
    except Exception as exc:  # noqa: BLE001 (replica isolation is the point)
        return (p, seed, None, f"{type(exc).__name__}: {exc}")


def _aggregate(rows: list[MetricRow]) -> list[dict]:
    groups: dict[tuple, list[float]] = {}
    for r in rows:
        groups.setdefault((r.p, r.t, r.metric), []).append(r.value)
    out = []
    for (p, t, metric), vals in sorted(groups.items()):
        n = len(vals)
        mean = float(np.mean(vals))
        stderr = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        out.append(
            {"p": p, "t": t, "metric": metric, "mean": mean, "stderr": stderr, "n": n}
        )
    return out


def run_ensemble(config: EnsembleConfig) -> EnsembleReport:
    """Execute all replicas of the configured experiment and aggregate.

    The result is independent of execution order and of ``width``: rows are
    keyed and sorted by ``(p, seed, t, metric)`` and each replica's seed is
    fixed up front.  Raises ``BatchError`` when not a single replica
    succeeds.
    """
    tasks = [
        (config.experiment, p, config.steps, config.base_seed + r, config.params)
        for p in config.p_grid
        for r in range(config.replicas)
    ]
    if config.width > 1:
        with ProcessPoolExecutor(max_workers=config.width) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=8))
    else:
        results = [_run_task(t) for t in tasks]

    rows: list[MetricRow] = []
    failures: list[dict] = []
    for p, seed, payload, err in results:
        if err is not None:
            failures.append({"p": p, "seed": seed, "error": err})
        else:
            rows.extend(
                MetricRow(p=p, seed=seed, t=t, metric=m, value=v)
                for t, m, v in payload
            )
    if not rows:
        raise BatchError(
            f"all {len(tasks)} replicas failed; first error: "
            f"{failures[0]['error'] if failures else 'none recorded'}"
        )
    rows.sort(key=lambda r: (r.p, r.seed, r.t, r.metric))
    failures.sort(key=lambda f: (f["p"], f["seed"]))
    return EnsembleReport(
        schema=SCHEMA,
        version=__version__,
        experiment=config.experiment,
        config=config.as_dict(),
        rows=tuple(rows),
        failures=tuple(failures),
        aggregates=tuple(_aggregate(rows)),
    )


# ----------------------------------------------------------------------
# persistence


def write_report(report: EnsembleReport, path) -> None:
    doc = {
        "schema": report.schema,
        "version": report.version,
        "experiment": report.experiment,
        "config": report.config,
        "rows": [asdict(r) for r in report.rows],
        "failures": list(report.failures),
        "aggregates": list(report.aggregates),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_report(path) -> EnsembleReport:
    with open(path, "r") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(
                f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}"
            ) from exc
    for key in ("schema", "version", "experiment", "config", "rows", "failures", "aggregates"):
        if key not in doc:
            raise ParseError(f"{path}: missing field {key!r}")
    if doc["schema"] != SCHEMA:
        raise ParseError(f"{path}: schema {doc['schema']!r}, expected {SCHEMA!r}")
    try:
        rows = tuple(MetricRow(**r) for r in doc["rows"])
    except TypeError as exc:
        raise ParseError(f"{path}: malformed row ({exc})") from exc
    return EnsembleReport(
        schema=doc["schema"],
        version=doc["version"],
        experiment=doc["experiment"],
        config=doc["config"],
        rows=rows,
        failures=tuple(doc["failures"]),
        aggregates=tuple(doc["aggregates"]),
    )


def write_rows_csv(report: EnsembleReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "seed", "t", "metric", "value"])
        for r in report.rows:
            w.writerow([repr(r.p), r.seed, r.t, r.metric, repr(r.value)])
