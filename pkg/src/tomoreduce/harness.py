"""Batch experiment runner: seed-stable grids, per-trial records, summary
statistics, and CSV / JSON Lines persistence.

Records are append-ordered by (cell index, trial index) and every field
except wall_time is a pure function of the master seed, so re-running a
configuration reproduces the record files byte for byte once wall-time
columns are excluded.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .reduction import (
    ReductionConfig,
    ReductionError,
    ReductionReport,
    gentle_measurement_experiment,
    proposition_search,
    run_reduction,
)
from .seeding import child_seed
from .states import (
    fidelity_mixed,
    fidelity_pure_pure,
    random_pure_state,
    random_rank_r_state,
)
from .tomography import (
    TomographyBackend,
    estimate_mixed_state_from_measurements,
    estimate_pure_state_from_measurements,
)

__all__ = [
    "DEFAULT_R_GRID",
    "DEFAULT_D_GRID",
    "DEFAULT_EPS_GRID",
    "DEFAULT_DELTA_GRID",
    "DEFAULT_N_GRID",
    "DEFAULT_ETA_GRID",
    "DEFAULT_PROP_D_GRID",
    "OUTPUT_DIR_ENV_VAR",
    "ExperimentKind",
    "ExperimentConfig",
    "CellSummary",
    "ExperimentSummary",
    "ScalingFit",
    "flatten_report",
    "experiment_cells",
    "run_experiment",
    "write_records",
    "print_summary",
    "fit_scaling",
]

DEFAULT_R_GRID = (1, 2, 3)
DEFAULT_D_GRID = (2, 3, 4, 6, 8)
DEFAULT_EPS_GRID = (0.2, 0.1, 0.05, 0.01)
DEFAULT_DELTA_GRID = (0.1, 0.01, 0.001)
DEFAULT_N_GRID = (10_000, 100_000, 1_000_000)
DEFAULT_ETA_GRID = (0.01, 0.1, 0.3)
DEFAULT_PROP_D_GRID = (2, 3, 4, 5, 6)

OUTPUT_DIR_ENV_VAR = "TOMOREDUCE_OUT_DIR"


class ExperimentKind(Enum):
    CHAIN_SWEEP = "chain_sweep"
    REDUCTION_RUN = "reduction_run"
    SCALING_PURE = "scaling_pure"
    SCALING_MIXED = "scaling_mixed"
    GENTLE_MEASUREMENT = "gentle_measurement"
    PROPOSITION_SEARCH = "proposition_search"


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment's grids, trial count, seeding, and output target."""

    experiment: ExperimentKind
    r_values: tuple[int, ...] = DEFAULT_R_GRID
    d_values: tuple[int, ...] = DEFAULT_D_GRID
    eps_values: tuple[float, ...] = DEFAULT_EPS_GRID
    delta_values: tuple[float, ...] = DEFAULT_DELTA_GRID
    n_values: tuple[int, ...] = DEFAULT_N_GRID
    trials: int = 100
    master_seed: int = 0
    backend: str = "oracle"  # "oracle" or "measurement"
    n_copies: int = 10_000
    extra_copy_factor: float = 4.0
    prop_batch: int = 10_000
    out_path: str | None = None
    out_format: str = "csv"

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.master_seed < 0:
            raise ValueError("master seed must be nonnegative")
        if self.backend not in ("oracle", "measurement"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.out_format not in ("csv", "jsonl"):
            raise ValueError(f"unknown output format {self.out_format!r}")
        if self.n_copies < 1:
            raise ValueError("n_copies must be at least 1")
        if self.extra_copy_factor <= 0:
            raise ValueError("extra_copy_factor must be positive")
        if self.prop_batch < 1:
            raise ValueError("prop_batch must be at least 1")
        for name in ("r_values", "d_values", "eps_values", "delta_values", "n_values"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if any(r < 1 for r in self.r_values) or any(d < 1 for d in self.d_values):
            raise ValueError("register dimensions must be positive")
        if any(not 0.0 < e < 1.0 for e in self.eps_values):
            raise ValueError("epsilon values must be in (0, 1)")
        if any(not 0.0 < x < 1.0 for x in self.delta_values):
            raise ValueError("delta values must be in (0, 1)")
        if any(n < 1 for n in self.n_values):
            raise ValueError("budget values must be positive")
        if not experiment_cells(self):
            raise ValueError("grids produce no cell satisfying the module preconditions")


def experiment_cells(config: ExperimentConfig) -> list[dict[str, Any]]:
    """Grid cells for the experiment, with r > d combinations filtered out."""
    kind = config.experiment
    if kind in (ExperimentKind.CHAIN_SWEEP, ExperimentKind.REDUCTION_RUN):
        return [
            {"r": r, "d": d, "epsilon": e}
            for r in config.r_values
            for d in config.d_values
            if r <= d
            for e in config.eps_values
        ]
    if kind is ExperimentKind.SCALING_PURE:
        return [{"d": d, "n": n} for d in config.d_values for n in config.n_values if n >= d * d]
    if kind is ExperimentKind.SCALING_MIXED:
        return [
            {"r": r, "d": d, "n": n}
            for r in config.r_values
            for d in config.d_values
            if r <= d
            for n in config.n_values
            if n >= d * d
        ]
    if kind is ExperimentKind.GENTLE_MEASUREMENT:
        return [
            {"r": r, "d": d, "delta": x}
            for r in config.r_values
            for d in config.d_values
            if r <= d
            for x in config.delta_values
        ]
    if kind is ExperimentKind.PROPOSITION_SEARCH:
        return [
            {"d": d, "eta": e}
            for d in config.d_values
            if d >= 2
            for e in config.eps_values
        ]
    raise ValueError(f"unknown experiment {kind!r}")  # pragma: no cover


def _backends(config: ExperimentConfig, epsilon: float) -> tuple[TomographyBackend, TomographyBackend]:
    if config.backend == "oracle":
        oracle = TomographyBackend.oracle(epsilon)
        return oracle, oracle
    backend = TomographyBackend.linear_inversion(config.n_copies)
    return backend, backend


def _check_flag(report: ReductionReport, name: str) -> bool | None:
    for c in report.chain:
        if c.name == name:
            return bool(c.satisfied) if c.applicable else None
    return None


def flatten_report(report: ReductionReport) -> dict[str, Any]:
    """Lossless flat view of a reduction report for record files."""
    return {
        "fidelity_mixed_estimate": float(report.fidelity_mixed_estimate),
        "keep_probability": float(report.keep_probability),
        "projector_rank": int(report.projector_rank),
        "extra_copies": int(report.extra_copies),
        "kept_count": int(report.kept_count),
        "samples_total": int(report.samples_total),
        "projected_fidelity": float(report.projected_fidelity),
        "estimate_fidelity": None
        if report.estimate_fidelity is None
        else float(report.estimate_fidelity),
        "final_fidelity": None if report.final_fidelity is None else float(report.final_fidelity),
        "keep_vs_mixed_fidelity_ok": _check_flag(report, "keep_vs_mixed_fidelity"),
        "keep_vs_epsilon_ok": _check_flag(report, "keep_vs_epsilon"),
        "projection_identity_ok": _check_flag(report, "projection_identity"),
        "final_vs_guaranteed_ok": _check_flag(report, "final_vs_guaranteed_bound"),
        "final_vs_tightened_holds": _check_flag(report, "final_vs_tightened_bound"),
        "violations": int(report.violations),
        "low_yield": bool(report.low_yield),
        "starved": bool(report.starved),
    }


_EMPTY_REPORT_FIELDS = {
    "fidelity_mixed_estimate": None,
    "keep_probability": None,
    "projector_rank": None,
    "extra_copies": None,
    "kept_count": None,
    "samples_total": None,
    "projected_fidelity": None,
    "estimate_fidelity": None,
    "final_fidelity": None,
    "keep_vs_mixed_fidelity_ok": None,
    "keep_vs_epsilon_ok": None,
    "projection_identity_ok": None,
    "final_vs_guaranteed_ok": None,
    "final_vs_tightened_holds": None,
    "violations": None,
    "low_yield": None,
    "starved": None,
}


def _reduction_record(
    config: ExperimentConfig,
    cell_index: int,
    trial_index: int,
    cell: Mapping[str, Any],
    trial_seed: int,
) -> dict[str, Any]:
    r, d, eps = cell["r"], cell["d"], cell["epsilon"]
    start = time.perf_counter()
    psi = random_pure_state(r, d, child_seed(trial_seed, 0))
    mixed, pure = _backends(config, eps)
    rconfig = ReductionConfig(
        r=r,
        d=d,
        n_copies=config.n_copies,
        epsilon=eps,
        extra_copy_factor=config.extra_copy_factor,
        mixed_backend=mixed,
        pure_backend=pure,
        seed=child_seed(trial_seed, 1),
    )
    error = ""
    try:
        report_fields: dict[str, Any] = flatten_report(run_reduction(psi, rconfig))
    except ReductionError as exc:
        report_fields = dict(_EMPTY_REPORT_FIELDS)
        error = str(exc)
    record = {
        "experiment": config.experiment.value,
        "cell": cell_index,
        "trial": trial_index,
        "r": int(r),
        "d": int(d),
        "epsilon": float(eps),
        "seed": int(trial_seed),
        **report_fields,
        "guaranteed_bound": float(1.0 - 16.0 * eps),
        "error": error,
        "wall_time": time.perf_counter() - start,
    }
    return record


def _scaling_pure_record(config, cell_index, trial_index, cell, trial_seed) -> dict[str, Any]:
    d, n = cell["d"], cell["n"]
    start = time.perf_counter()
    psi = random_pure_state(1, d, child_seed(trial_seed, 0))
    estimate = estimate_pure_state_from_measurements(psi, n, child_seed(trial_seed, 1))
    fid = fidelity_pure_pure(estimate, psi)
    return {
        "experiment": config.experiment.value,
        "cell": cell_index,
        "trial": trial_index,
        "d": int(d),
        "n": int(n),
        "seed": int(trial_seed),
        "fidelity": float(fid),
        "infidelity": float(1.0 - fid),
        "violations": 0,
        "wall_time": time.perf_counter() - start,
    }


def _scaling_mixed_record(config, cell_index, trial_index, cell, trial_seed) -> dict[str, Any]:
    r, d, n = cell["r"], cell["d"], cell["n"]
    start = time.perf_counter()
    rho = random_rank_r_state(d, r, child_seed(trial_seed, 0))
    estimate = estimate_mixed_state_from_measurements(rho, r, n, child_seed(trial_seed, 1))
    fid = fidelity_mixed(rho, estimate)
    return {
        "experiment": config.experiment.value,
        "cell": cell_index,
        "trial": trial_index,
        "r": int(r),
        "d": int(d),
        "n": int(n),
        "seed": int(trial_seed),
        "fidelity": float(fid),
        "infidelity": float(1.0 - fid),
        "violations": 0,
        "wall_time": time.perf_counter() - start,
    }


def _gentle_record(config, cell_index, trial_index, cell, trial_seed) -> dict[str, Any]:
    r, d, delta = cell["r"], cell["d"], cell["delta"]
    start = time.perf_counter()
    psi = random_pure_state(r, d, child_seed(trial_seed, 0))
    result = gentle_measurement_experiment(psi, delta, 1, child_seed(trial_seed, 1))
    if result.completed:
        t = float(result.trace_distances[0])
        fields = {
            "trace_distance": t,
            "ratio_sqrt": t / math.sqrt(delta),
            "ratio_linear": t / delta,
            "skipped": False,
        }
    else:
        fields = {"trace_distance": None, "ratio_sqrt": None, "ratio_linear": None, "skipped": True}
    return {
        "experiment": config.experiment.value,
        "cell": cell_index,
        "trial": trial_index,
        "r": int(r),
        "d": int(d),
        "delta": float(delta),
        "seed": int(trial_seed),
        **fields,
        "violations": 0,
        "wall_time": time.perf_counter() - start,
    }


def _prop_search_record(config, cell_index, trial_index, cell, trial_seed) -> dict[str, Any]:
    d, eta = cell["d"], cell["eta"]
    start = time.perf_counter()
    result = proposition_search(d, eta, config.prop_batch, trial_seed)
    return {
        "experiment": config.experiment.value,
        "cell": cell_index,
        "trial": trial_index,
        "d": int(d),
        "eta": float(eta),
        "seed": int(trial_seed),
        "checked": int(result.checked),
        "violations": int(result.violations),
        "min_slack": float(result.min_slack),
        "min_c": float(result.min_c),
        "max_triangle_excess": float(result.max_triangle_excess),
        "wall_time": time.perf_counter() - start,
    }


_RECORD_BUILDERS = {
    ExperimentKind.CHAIN_SWEEP: _reduction_record,
    ExperimentKind.REDUCTION_RUN: _reduction_record,
    ExperimentKind.SCALING_PURE: _scaling_pure_record,
    ExperimentKind.SCALING_MIXED: _scaling_mixed_record,
    ExperimentKind.GENTLE_MEASUREMENT: _gentle_record,
    ExperimentKind.PROPOSITION_SEARCH: _prop_search_record,
}


@dataclass(frozen=True)
class CellSummary:
    label: str
    trials: int
    violations: int
    failures: int
    stats: dict[str, float]


@dataclass(frozen=True)
class ExperimentSummary:
    experiment: ExperimentKind
    cells: tuple[CellSummary, ...]
    violations_total: int
    failures_total: int
    records: tuple[dict[str, Any], ...]
    out_path: str | None

    @property
    def ok(self) -> bool:
        return self.violations_total == 0


def _quantile(values: Sequence[float], q: float) -> float:
    return float(np.quantile(np.asarray(values, dtype=float), q)) if values else float("nan")


def _cell_summary(kind: ExperimentKind, cell: Mapping[str, Any], records: list[dict]) -> CellSummary:
    label = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in cell.items())
    violations = sum(1 for rec in records if (rec.get("violations") or 0) > 0)
    failures = sum(1 for rec in records if rec.get("error"))
    stats: dict[str, float] = {}
    if kind in (ExperimentKind.CHAIN_SWEEP, ExperimentKind.REDUCTION_RUN):
        finals = [r["final_fidelity"] for r in records if r.get("final_fidelity") is not None]
        keeps = [r["keep_probability"] for r in records if r.get("keep_probability") is not None]
        stats["final_min"] = _quantile(finals, 0.0)
        stats["final_median"] = _quantile(finals, 0.5)
        stats["keep_min"] = _quantile(keeps, 0.0)
        stats["bound"] = float(1.0 - 16.0 * cell["epsilon"])
        stats["samples"] = float(sum(r.get("samples_total") or 0 for r in records))
    elif kind in (ExperimentKind.SCALING_PURE, ExperimentKind.SCALING_MIXED):
        infids = [r["infidelity"] for r in records]
        stats["infid_median"] = _quantile(infids, 0.5)
        stats["infid_max"] = _quantile(infids, 1.0)
    elif kind is ExperimentKind.GENTLE_MEASUREMENT:
        ts = [r["trace_distance"] for r in records if r.get("trace_distance") is not None]
        stats["t_max"] = _quantile(ts, 1.0)
        stats["ratio_sqrt_max"] = stats["t_max"] / math.sqrt(cell["delta"]) if ts else float("nan")
        stats["ratio_linear_max"] = stats["t_max"] / cell["delta"] if ts else float("nan")
        stats["skipped"] = float(sum(1 for r in records if r.get("skipped")))
    elif kind is ExperimentKind.PROPOSITION_SEARCH:
        stats["checked"] = float(sum(r["checked"] for r in records))
        stats["violations_found"] = float(sum(r["violations"] for r in records))
        stats["min_slack"] = min(r["min_slack"] for r in records)
    return CellSummary(
        label=label, trials=len(records), violations=violations, failures=failures, stats=stats
    )


def run_experiment(config: ExperimentConfig) -> ExperimentSummary:
    """Execute all grid cells x trials, persist records, and summarize.

    Cell and trial seeds are split from the master seed, so cells can be
    evaluated in any order without changing any record field but wall_time.
    """
    cells = experiment_cells(config)
    builder = _RECORD_BUILDERS[config.experiment]
    records: list[dict[str, Any]] = []
    summaries: list[CellSummary] = []
    for cell_index, cell in enumerate(cells):
        cell_seed = child_seed(config.master_seed, cell_index)
        cell_records = [
            builder(config, cell_index, trial_index, cell, child_seed(cell_seed, trial_index))
            for trial_index in range(config.trials)
        ]
        records.extend(cell_records)
        summaries.append(_cell_summary(config.experiment, cell, cell_records))
    if config.out_path is not None:
        write_records(records, config.out_path, config.out_format)
    return ExperimentSummary(
        experiment=config.experiment,
        cells=tuple(summaries),
        violations_total=sum(c.violations for c in summaries),
        failures_total=sum(c.failures for c in summaries),
        records=tuple(records),
        out_path=config.out_path,
    )


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records(records: Iterable[Mapping[str, Any]], path: str | os.PathLike, fmt: str) -> None:
    """Persist records as RFC-4180 CSV or JSON Lines, full float precision."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    out = Path(path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        keys = list(records[0].keys())
        with open(out, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(keys)
            for rec in records:
                writer.writerow([_csv_cell(rec.get(k)) for k in keys])
    elif fmt == "jsonl":
        with open(out, "w") as f:
            for rec in records:
                f.write(json.dumps(dict(rec)))
                f.write("\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")


def print_summary(summary: ExperimentSummary, file=None) -> None:
    """Aligned per-cell table plus a verdict line."""
    stat_keys: list[str] = []
    for cell in summary.cells:
        for k in cell.stats:
            if k not in stat_keys:
                stat_keys.append(k)
    header = ["cell", "trials", "violations", "failures", *stat_keys]
    rows = [header]
    for cell in summary.cells:
        rows.append(
            [
                cell.label,
                str(cell.trials),
                str(cell.violations),
                str(cell.failures),
                *[
                    f"{cell.stats[k]:.6g}" if k in cell.stats else ""
                    for k in stat_keys
                ],
            ]
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    for row in rows:
        print("  ".join(col.ljust(w) for col, w in zip(row, widths)), file=file)
    print(
        f"{summary.experiment.value}: {len(summary.records)} records, "
        f"{summary.violations_total} bound violation(s), {summary.failures_total} failed trial(s)",
        file=file,
    )


@dataclass(frozen=True)
class ScalingFit:
    """Log-log least-squares fit of median infidelity against shot budget."""

    slope: float
    intercept: float
    budgets: tuple[int, ...]
    medians: tuple[float, ...]
    residuals: tuple[float, ...]


def fit_scaling(records: Iterable[Mapping[str, Any]]) -> ScalingFit:
    """Fit log(median infidelity) = slope * log(n) + intercept.

    Needs records with "n" and "infidelity" fields covering at least three
    distinct budgets.
    """
    groups: dict[int, list[float]] = {}
    for rec in records:
        groups.setdefault(int(rec["n"]), []).append(float(rec["infidelity"]))
    if len(groups) < 3:
        raise ValueError(f"need at least 3 distinct budget points, got {len(groups)}")
    budgets = sorted(groups)
    medians = np.array([float(np.median(groups[n])) for n in budgets])
    x = np.log(np.array(budgets, dtype=float))
    y = np.log(np.maximum(medians, 1e-300))
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    return ScalingFit(
        slope=float(slope),
        intercept=float(intercept),
        budgets=tuple(budgets),
        medians=tuple(float(m) for m in medians),
        residuals=tuple(float(r) for r in residuals),
    )
