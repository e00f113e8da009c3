"""Monte Carlo harness for relative bias and RMSE of the estimators.

Each (cell, replication) pair draws from its own sub-stream
``(master_seed, (cell, replication))``, so results do not depend on how
the work is scheduled across threads.
"""
from __future__ import annotations

import csv
import itertools
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bootstrap import SCHEMES, BootstrapConfig, bootstrap_bias_reduce
from .estimators import mle_numeric, point_estimate
from .exceptions import EstimationFailed
from .family import NAMED_MODELS, from_named, to_named
from .sampling import SeededStream, sample

__all__ = [
    "ESTIMATORS",
    "Scenario",
    "Cell",
    "EstimateRecord",
    "MetricRow",
    "read_config",
    "simulate_estimates",
    "aggregate",
    "run_monte_carlo",
    "write_metrics",
    "write_estimates",
    "default_threads",
]

ESTIMATORS = ("mom", "mom_boot", "mle")
FAILURE_FLAG = 0.25
THREADS_ENV = "WEIGHTEDEXP_THREADS"


@dataclass(frozen=True)
class Cell:
    index: int
    native: dict
    n: int


@dataclass
class Scenario:
    """A simulation design: a named model, a parameter grid and sample sizes.

    ``grid`` maps every native parameter of ``model`` to a list of values;
    cells are the cartesian product of the grid (in the model's parameter
    order) with ``n_grid``, sample size varying fastest.
    """

    model: str
    grid: dict
    n_grid: list
    N: int = 1000
    B: int = 200
    master_seed: int = 0
    estimators: tuple = ESTIMATORS
    scheme: str = "nonparametric"
    param_names: tuple = field(init=False)

    def __post_init__(self):
        if self.model not in NAMED_MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        self.param_names = NAMED_MODELS[self.model].param_names
        missing = set(self.param_names) - set(self.grid)
        extra = set(self.grid) - set(self.param_names)
        if missing or extra:
            raise ValueError(f"grid for {self.model} needs {self.param_names}; "
                             f"missing {sorted(missing)}, unexpected {sorted(extra)}")
        self.grid = {k: [float(v) for v in np.atleast_1d(self.grid[k])] for k in self.param_names}
        self.n_grid = [int(n) for n in self.n_grid]
        self.estimators = tuple(self.estimators)
        if any(v <= 0 for vals in self.grid.values() for v in vals) or any(n < 2 for n in self.n_grid):
            raise ValueError("grid values must be positive and sample sizes at least 2")
        if self.N < 1 or self.B < 1:
            raise ValueError("N and B must be at least 1")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad or not self.estimators:
            raise ValueError(f"estimators must be a non-empty subset of {ESTIMATORS}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        for native in self._grid_points():
            from_named(self.model, native)

    def _grid_points(self):
        for combo in itertools.product(*(self.grid[k] for k in self.param_names)):
            yield dict(zip(self.param_names, combo))

    def cells(self) -> list[Cell]:
        out = []
        for native in self._grid_points():
            for n in self.n_grid:
                out.append(Cell(len(out), native, n))
        return out


@dataclass(frozen=True)
class EstimateRecord:
    cell: int
    replication: int
    estimator: str
    parameter: str
    value: float

    @property
    def ok(self) -> bool:
        return math.isfinite(self.value)


@dataclass(frozen=True)
class MetricRow:
    cell: int
    native: dict
    n: int
    estimator_name: str
    parameter_name: str
    true_value: float
    RB: float
    RMSE: float
    N: int
    N_effective: int
    flagged: bool


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

_INT_KEYS = {"replications": "N", "bootstrap": "B", "seed": "master_seed"}


def read_config(path) -> Scenario:
    """Parse a ``key = value`` scenario file.

    Recognized keys: ``model``, ``sample_sizes``, ``replications``,
    ``bootstrap``, ``estimators``, ``scheme``, ``seed``; every other key is a
    native parameter of the model and takes a comma-separated list.
    """
    kwargs, grid = {}, {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        items = [v.strip() for v in value.split(",") if v.strip()]
        try:
            if key == "model":
                kwargs["model"] = value
            elif key == "sample_sizes":
                kwargs["n_grid"] = [int(v) for v in items]
            elif key in _INT_KEYS:
                kwargs[_INT_KEYS[key]] = int(value)
            elif key == "estimators":
                kwargs["estimators"] = tuple(items)
            elif key == "scheme":
                kwargs["scheme"] = value
            else:
                grid[key] = [float(v) for v in items]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    for required in ("model", "n_grid"):
        if required not in kwargs:
            raise ValueError(f"{path}: missing required key {'sample_sizes' if required == 'n_grid' else required!r}")
    return Scenario(grid=grid, **kwargs)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def _replicate(scenario: Scenario, cell: Cell, r: int) -> list[EstimateRecord]:
    model = from_named(scenario.model, cell.native)
    spec, names = model.spec, scenario.param_names
    stream = SeededStream(scenario.master_seed, (cell.index, r))
    x = sample(spec, model.params, cell.n, stream.spawn(0))
    values = {}

    def native(mu, sigma):
        out = to_named(scenario.model, spec, (mu, sigma), strict=False)
        return [float(out[k]) for k in names]

    if "mom" in scenario.estimators:
        try:
            values["mom"] = native(*point_estimate(x, spec))
        except EstimationFailed:
            pass
    if "mom_boot" in scenario.estimators:
        try:
            cfg = BootstrapConfig(scenario.B, scenario.scheme, stream.spawn(1))
            res = bootstrap_bias_reduce(x, spec, cfg, named=scenario.model)
            values["mom_boot"] = [float(res.reduced[res.names.index(k)]) for k in names]
        except EstimationFailed:
            pass
    if "mle" in scenario.estimators:
        try:
            p = mle_numeric(x, spec)
            values["mle"] = native(p.mu, p.sigma)
        except EstimationFailed:
            pass

    records = []
    for est in scenario.estimators:
        vals = values.get(est, [math.nan] * len(names))
        for k, v in zip(names, vals):
            records.append(EstimateRecord(cell.index, r, est, k, v))
    return records


def simulate_estimates(scenario: Scenario, threads: int | None = None) -> list[EstimateRecord]:
    """Run every replication of every cell and return the raw estimates.

    Records are ordered by (cell, replication, estimator, parameter)
    regardless of ``threads``.
    """
    threads = threads or default_threads()
    tasks = [(cell, r) for cell in scenario.cells() for r in range(scenario.N)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if threads == 1:
            chunks = [_replicate(scenario, c, r) for c, r in tasks]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunks = list(pool.map(lambda t: _replicate(scenario, *t), tasks,
                                       chunksize=max(1, len(tasks) // (8 * threads))))
    return [rec for chunk in chunks for rec in chunk]


def aggregate(scenario: Scenario, records) -> list[MetricRow]:
    """Relative bias and RMSE per (cell, estimator, parameter)."""
    buckets: dict = {}
    for rec in records:
        buckets.setdefault((rec.cell, rec.estimator, rec.parameter), []).append(rec.value)
    rows = []
    for cell in scenario.cells():
        for est in scenario.estimators:
            for k in scenario.param_names:
                truth = cell.native[k]
                vals = np.array([v for v in buckets.get((cell.index, est, k), []) if math.isfinite(v)])
                n_eff = int(vals.size)
                if n_eff:
                    rb = abs(vals.mean() - truth) / abs(truth)
                    rmse = math.sqrt(np.mean((vals - truth) ** 2))
                else:
                    rb = rmse = math.nan
                rows.append(MetricRow(cell.index, cell.native, cell.n, est, k, truth, float(rb), float(rmse),
                                      scenario.N, n_eff, n_eff < (1.0 - FAILURE_FLAG) * scenario.N))
    return rows


def run_monte_carlo(scenario: Scenario, threads: int | None = None) -> list[MetricRow]:
    return aggregate(scenario, simulate_estimates(scenario, threads))


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def fmt(value) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_metrics(path, scenario: Scenario, rows) -> None:
    header = ["cell", *scenario.param_names, "n", "estimator", "parameter", "true_value",
              "RB", "RMSE", "N", "N_effective", "flagged"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(row.cell), *(fmt(row.native[k]) for k in scenario.param_names), fmt(row.n),
                        row.estimator_name, row.parameter_name, fmt(row.true_value), fmt(row.RB),
                        fmt(row.RMSE), fmt(row.N), fmt(row.N_effective), fmt(row.flagged)])


def write_estimates(path, scenario: Scenario, records) -> None:
    cells = scenario.cells()
    header = ["cell", *scenario.param_names, "n", "replication", "estimator", "parameter",
              "estimate", "status"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for rec in records:
            cell = cells[rec.cell]
            w.writerow([fmt(rec.cell), *(fmt(cell.native[k]) for k in scenario.param_names), fmt(cell.n),
                        fmt(rec.replication), rec.estimator, rec.parameter,
                        fmt(rec.value) if rec.ok else "", "ok" if rec.ok else "failed"])
