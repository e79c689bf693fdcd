"""
Batch experiments: sweep points times seeds, run in parallel, written as
trace CSVs, a summary table, an aggregate table and a JSON manifest.

Output bytes depend only on the Experiment: runs are ordered by
(sweep value index, seed) before anything is written, and wall-clock
columns stay empty unless record_timing is set.
"""
import json
import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from src.logic.config_loader import Experiment, apply_sweep, config_to_dict, experiment_to_dict
from src.logic.logger import WORKER_LOGGER, setup_worker_logging
from src.logic.metrics import MetricsSummary, summarize
from src.logic.simulator import SimConfig, run_simulation

logger = logging.getLogger(__name__)

CSV_OPTIONS = {"index": False, "float_format": "%.9g", "lineterminator": "\n"}
SUMMARY_PREFIX = ["strategy", "sweep_key", "sweep_value", "seed"]
TIMING_COLUMNS = ["planner_ms_med", "planner_ms_p95"]


@dataclass(frozen=True)
class RunSpec:
    """One (sweep value, seed) point of an experiment."""

    run_id: str
    value_index: int
    sweep_key: str
    sweep_value: Any
    seed: int
    config: SimConfig


@dataclass
class RunOutcome:
    spec: RunSpec
    status: str
    error: Optional[str] = None
    metrics: Optional[MetricsSummary] = None
    trace: Optional[pd.DataFrame] = None
    arrived: int = 0


@dataclass
class ExperimentResult:
    output_dir: Path
    outcomes: List[RunOutcome]
    summary: pd.DataFrame
    aggregate: pd.DataFrame
    io_errors: List[str] = field(default_factory=list)

    @property
    def failed(self) -> List[RunOutcome]:
        return [o for o in self.outcomes if o.status != "ok"]


def success_column(accuracy: float, time_limit: float) -> str:
    return f"success@{accuracy:g}@{time_limit:g}"


def summary_columns(e: Experiment) -> List[str]:
    """Exact column order of summary.csv."""
    success = [success_column(a, t) for a in e.accuracy_grid for t in e.resolved_time_grid()]
    return SUMMARY_PREFIX + ["mean_ate", "max_ate"] + success + TIMING_COLUMNS


def expand_runs(e: Experiment) -> List[RunSpec]:
    """
    All runs of an experiment in output order.

    Args:
        e: Validated experiment

    Returns:
        RunSpecs sorted by (sweep value index, seed)
    """
    key = e.sweep.key if e.sweep else ""
    runs = []
    for v_idx, value in enumerate(e.sweep_values()):
        point = apply_sweep(e.base, e.sweep.key if e.sweep else None, value)
        for seed in sorted(e.seeds):
            cfg = replace(point, master_seed=seed)
            tag = f"_{key}-{value}" if e.sweep else ""
            run_id = f"run{len(runs):03d}_{cfg.strategy.value}{tag}_seed{seed}"
            runs.append(RunSpec(run_id, v_idx, key, "" if value is None else value, seed, cfg))
    return runs


def execute_run(spec: RunSpec, accuracy_grid, time_grid) -> RunOutcome:
    """
    Simulate one run and compute its metrics; failures are captured, never raised.

    Top-level so it can be shipped to worker processes.
    """
    try:
        record = run_simulation(spec.config)
        metrics = summarize(record, accuracy_grid, time_grid)
        arrived = sum(t is not None for t in record.arrival_times)
        return RunOutcome(spec, "ok", metrics=metrics, trace=record.to_frame(), arrived=arrived)
    except Exception as e:
        logging.getLogger(WORKER_LOGGER).exception(f"{spec.run_id} failed")
        logger.error(f"Run {spec.run_id} failed: {e}")
        return RunOutcome(spec, "failed", error=f"{type(e).__name__}: {e}")


def _execute_all(e: Experiment, runs: List[RunSpec], worker_log: str) -> List[RunOutcome]:
    time_grid = e.resolved_time_grid()
    if e.workers <= 1 or len(runs) <= 1:
        return [execute_run(r, e.accuracy_grid, time_grid) for r in runs]

    ctx = multiprocessing.get_context("spawn")
    outcomes = []
    with ProcessPoolExecutor(
        max_workers=min(e.workers, len(runs)),
        mp_context=ctx,
        initializer=setup_worker_logging,
        initargs=(worker_log,),
    ) as pool:
        futures = [pool.submit(execute_run, r, e.accuracy_grid, time_grid) for r in runs]
        for run, future in zip(runs, futures):
            try:
                outcomes.append(future.result())
            except Exception as err:
                logger.error(f"Worker for {run.run_id} died: {err}")
                outcomes.append(RunOutcome(run, "failed", error=f"{type(err).__name__}: {err}"))
    return outcomes


def _summary_row(e: Experiment, outcome: RunOutcome) -> Dict[str, Any]:
    spec = outcome.spec
    row: Dict[str, Any] = {
        "strategy": spec.config.strategy.value,
        "sweep_key": spec.sweep_key,
        "sweep_value": spec.sweep_value,
        "seed": spec.seed,
    }
    m = outcome.metrics
    row["mean_ate"] = m.mean_ate if m else np.nan
    row["max_ate"] = m.max_ate if m else np.nan
    for acc in e.accuracy_grid:
        for limit in e.resolved_time_grid():
            row[success_column(acc, limit)] = m.success[(acc, limit)] if m else np.nan
    timed = m is not None and e.record_timing and m.planner_ms_median is not None
    row["planner_ms_med"] = m.planner_ms_median if timed else np.nan
    row["planner_ms_p95"] = m.planner_ms_p95 if timed else np.nan
    return row


def build_summary(e: Experiment, outcomes: List[RunOutcome]) -> pd.DataFrame:
    rows = [_summary_row(e, o) for o in outcomes]
    return pd.DataFrame(rows, columns=summary_columns(e))


def aggregate_summary(summary: pd.DataFrame) -> pd.DataFrame:
    """
    Mean and population std of every metric per (strategy, sweep_key, sweep_value).

    Failed runs contribute NaN and are skipped by the statistics but
    still counted in the runs column.
    """
    keys = ["strategy", "sweep_key", "sweep_value"]
    metrics = [c for c in summary.columns if c not in SUMMARY_PREFIX]
    frame = summary.assign(sweep_value=summary["sweep_value"].astype(str))
    grouped = frame.groupby(keys, sort=False, dropna=False)
    out = grouped.size().rename("runs").to_frame()
    for col in metrics:
        out[f"{col}_mean"] = grouped[col].mean()
        out[f"{col}_std"] = grouped[col].std(ddof=0)
    return out.reset_index()


def _manifest_entry(outcome: RunOutcome, trace_path: Optional[str]) -> Dict[str, Any]:
    spec = outcome.spec
    entry: Dict[str, Any] = {
        "run_id": spec.run_id,
        "status": outcome.status,
        "strategy": spec.config.strategy.value,
        "sweep_key": spec.sweep_key,
        "sweep_value": spec.sweep_value,
        "seed": spec.seed,
        "trace": trace_path,
        "config": config_to_dict(spec.config),
    }
    if outcome.error:
        entry["error"] = outcome.error
    if outcome.metrics:
        m = outcome.metrics
        entry["metrics"] = {
            "mean_ate": m.mean_ate,
            "max_ate": m.max_ate,
            "pooled_ate": m.pooled_ate,
            "mean_error": m.mean_error,
            "per_bmav_ate": m.per_bmav_ate,
            "indicator_correlation": asdict(m.correlation) if m.correlation else None,
            "arrived": outcome.arrived,
        }
    return entry


def _write_csv(frame: pd.DataFrame, path: Path, io_errors: List[str]) -> bool:
    try:
        frame.to_csv(path, **CSV_OPTIONS)
        logger.debug(f"Wrote {path}")
        return True
    except OSError as e:
        logger.error(f"Could not write {path}: {e}")
        io_errors.append(f"{path}: {e}")
        return False


def run_experiment(e: Experiment, worker_log: str = "logs/worker.log") -> ExperimentResult:
    """
    Run every (sweep value, seed) point and write all artifacts.

    Layout of output_dir: traces/<run_id>.csv, summary.csv, aggregate.csv,
    manifest.json.

    Args:
        e: Validated experiment
        worker_log: Log file for worker processes

    Returns:
        ExperimentResult; per-run failures and per-file I/O errors are
        collected rather than raised
    """
    out = Path(e.output_dir)
    traces_dir = out / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)

    runs = expand_runs(e)
    logger.info(f"Running {len(runs)} runs with {e.workers} worker(s) into {out}")
    outcomes = _execute_all(e, runs, worker_log)

    io_errors: List[str] = []
    entries = []
    for outcome in outcomes:
        trace_path = None
        if outcome.trace is not None:
            path = traces_dir / f"{outcome.spec.run_id}.csv"
            if _write_csv(outcome.trace, path, io_errors):
                trace_path = path.relative_to(out).as_posix()
        entries.append(_manifest_entry(outcome, trace_path))

    summary = build_summary(e, outcomes)
    aggregate = aggregate_summary(summary)
    _write_csv(summary, out / "summary.csv", io_errors)
    _write_csv(aggregate, out / "aggregate.csv", io_errors)

    manifest = {
        "experiment": experiment_to_dict(e),
        "summary": "summary.csv",
        "aggregate": "aggregate.csv",
        "runs": entries,
        "io_errors": io_errors,
    }
    try:
        with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as f:
            json.dump(manifest, f, indent=2)
            f.write("\n")
    except OSError as err:
        logger.error(f"Could not write manifest: {err}")
        io_errors.append(f"{out / 'manifest.json'}: {err}")

    failed = sum(o.status != "ok" for o in outcomes)
    logger.info(f"Experiment finished: {len(outcomes) - failed} ok, {failed} failed, {len(io_errors)} I/O errors")
    return ExperimentResult(out, outcomes, summary, aggregate, io_errors)
