"""
Localization-error and navigation-success metrics computed from trace records.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.logic.errors import InvalidArgumentError
from src.logic.geometry import Vec2
from src.logic.simulator import TraceRecord

ACCURACY_GRID = (0.2, 0.4, 0.6, 0.8)
TIME_GRID = (60.0, 120.0, 180.0, 240.0, 300.0, 360.0, 420.0)


@dataclass
class MetricsSummary:
    """
    Metrics of one run.

    mean_ate averages the per-BMAV ATEs; pooled_ate is the RMS over every
    (timestep, BMAV) sample and mean_error the plain mean of those samples.
    """

    per_bmav_ate: List[float]
    mean_ate: float
    max_ate: float
    pooled_ate: float
    mean_error: float
    success: Dict[Tuple[float, float], float] = field(default_factory=dict)
    planner_ms_median: Optional[float] = None
    planner_ms_p95: Optional[float] = None
    correlation: Optional["IndicatorCorrelation"] = None


def ate(estimated: Sequence[Vec2], truth: Sequence[Vec2]) -> float:
    """
    Absolute trajectory error: RMS of the per-timestep position errors.

    Args:
        estimated: Estimated positions, one per timestep
        truth: True positions, same length

    Returns:
        ATE in meters
    """
    if len(estimated) != len(truth):
        raise InvalidArgumentError(f"trajectory lengths differ: {len(estimated)} vs {len(truth)}")
    if not estimated:
        raise InvalidArgumentError("ATE of an empty trajectory is undefined")
    sq = [(e.x - g.x) ** 2 + (e.y - g.y) ** 2 for e, g in zip(estimated, truth)]
    return math.sqrt(sum(sq) / len(sq))


def _errors(frame: pd.DataFrame) -> pd.Series:
    return np.hypot(frame["est_x"] - frame["truth_x"], frame["est_y"] - frame["truth_y"])


def per_bmav_ate(records: TraceRecord) -> List[float]:
    frame = records.bmav_frame()
    if frame.empty:
        raise InvalidArgumentError("trace record holds no BMAV rows")
    frame = frame.assign(sq=_errors(frame) ** 2)
    rms = frame.groupby("id", sort=True)["sq"].mean().pow(0.5)
    return [float(v) for v in rms]


def first_arrival_times(records: TraceRecord, accuracy: float) -> List[Optional[float]]:
    """Earliest t at which each BMAV's true position is within accuracy of its destination."""
    frame = records.bmav_frame()
    dest = np.array([[q.x, q.y] for q in records.destinations])
    ids = frame["id"].to_numpy()
    dist = np.hypot(frame["truth_x"].to_numpy() - dest[ids, 0], frame["truth_y"].to_numpy() - dest[ids, 1])
    hits = frame.loc[dist <= accuracy]
    first = hits.groupby("id")["t"].min()
    return [float(first[i]) if i in first.index else None for i in range(records.n_bmav)]


def success_rate(records: TraceRecord, accuracy: float, time_limit: float) -> float:
    """
    Fraction of BMAVs that first came within accuracy of their destination by time_limit.

    Args:
        records: Trace of one run
        accuracy: Destination accuracy in meters
        time_limit: Deadline in seconds

    Returns:
        Fraction in [0, 1]
    """
    if records.n_bmav == 0:
        return 0.0
    arrivals = first_arrival_times(records, accuracy)
    return sum(1 for t in arrivals if t is not None and t <= time_limit) / records.n_bmav


def error_cdf(records: TraceRecord) -> List[Tuple[float, float]]:
    """Sorted per-sample position errors paired with the empirical CDF k/n."""
    frame = records.bmav_frame()
    if frame.empty:
        raise InvalidArgumentError("trace record holds no BMAV rows")
    errors = np.sort(_errors(frame).to_numpy())
    n = len(errors)
    return [(float(e), (k + 1) / n) for k, e in enumerate(errors)]


@dataclass(frozen=True)
class IndicatorCorrelation:
    """
    Pearson r between the uncertainty indicator tr(Sigma) and the squared position error.

    pooled uses every (timestep, BMAV) sample, per_bmav one series per BMAV and
    over_time the per-timestep means across BMAVs. None where a series is constant.
    """

    pooled: Optional[float]
    per_bmav: List[Optional[float]]
    over_time: Optional[float]


def _pearson(a: pd.Series, b: pd.Series) -> Optional[float]:
    r = a.corr(b)
    return None if pd.isna(r) else float(r)


def indicator_correlation(records: TraceRecord) -> IndicatorCorrelation:
    """How well tr(Sigma) tracks the squared error it is meant to stand in for."""
    frame = records.bmav_frame()
    if frame.empty:
        raise InvalidArgumentError("trace record holds no BMAV rows")
    frame = frame.assign(sq=_errors(frame) ** 2)
    per_bmav = [_pearson(g["trace_sigma"], g["sq"]) for _, g in frame.groupby("id", sort=True)]
    by_t = frame.groupby("t", sort=True)[["trace_sigma", "sq"]].mean()
    return IndicatorCorrelation(
        pooled=_pearson(frame["trace_sigma"], frame["sq"]),
        per_bmav=per_bmav,
        over_time=_pearson(by_t["trace_sigma"], by_t["sq"]),
    )


def planner_runtime(planner_ms: Sequence[float]) -> Tuple[Optional[float], Optional[float]]:
    """(median, 95th percentile) of planner invocations in milliseconds."""
    if not planner_ms:
        return None, None
    values = np.asarray(planner_ms, dtype=float)
    return float(np.median(values)), float(np.percentile(values, 95))


def summarize(
    records: TraceRecord,
    accuracy_grid: Sequence[float] = ACCURACY_GRID,
    time_grid: Sequence[float] = TIME_GRID,
) -> MetricsSummary:
    """All run-level metrics used by the experiment tables."""
    frame = records.bmav_frame()
    if frame.empty:
        raise InvalidArgumentError("trace record holds no BMAV rows")
    errors = _errors(frame).to_numpy()
    per_bmav = per_bmav_ate(records)

    success = {}
    for acc in accuracy_grid:
        arrivals = first_arrival_times(records, acc)
        for limit in time_grid:
            hit = sum(1 for t in arrivals if t is not None and t <= limit)
            success[(acc, limit)] = hit / records.n_bmav
    median, p95 = planner_runtime(records.planner_ms)
    return MetricsSummary(
        per_bmav_ate=per_bmav,
        mean_ate=float(np.mean(per_bmav)),
        max_ate=float(np.max(per_bmav)),
        pooled_ate=float(np.sqrt(np.mean(errors**2))),
        mean_error=float(np.mean(errors)),
        success=success,
        planner_ms_median=median,
        planner_ms_p95=p95,
        correlation=indicator_correlation(records),
    )
