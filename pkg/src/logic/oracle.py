"""
Brute-force check of the pruned planner.

With epsilon = 0 and sigma = 0 pruning only removes exact pose duplicates
whose covariances are dominated, so the pruned planner must reach the same
terminal score as enumerating every control sequence.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.logic.estimation import Belief
from src.logic.geometry import Arena, BmavCommand, Pose, Vec2
from src.logic.planning import ControlSetParams, PruneParams, plan, plan_exhaustive
from src.logic.simulator import SimConfig

logger = logging.getLogger(__name__)

SPEED_POOL = (0.0, 0.5, 1.0, 2.0)
TURN_POOL = (0.0, 0.5, -0.5, 1.0, -1.0, 2.0)
SCORE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class OracleMismatch:
    instance: int
    pruned_score: float
    exhaustive_score: float


@dataclass
class OracleReport:
    instances: int
    max_abs_diff: float = 0.0
    mismatches: List[OracleMismatch] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches


def _random_controls(rng: np.random.Generator) -> ControlSetParams:
    n_speeds = int(rng.integers(1, 3))
    n_turns = int(rng.integers(1, 4))
    speeds = rng.choice(SPEED_POOL, size=n_speeds, replace=False)
    turns = rng.choice(TURN_POOL, size=n_turns, replace=False)
    return ControlSetParams(tuple(float(s) for s in speeds), tuple(float(w) for w in turns))


def _random_belief(rng: np.random.Generator, centre: Vec2) -> Belief:
    offset = rng.uniform(-1.5, 1.5, size=2)
    a = rng.normal(0.0, 0.5, size=(2, 2))
    cov = a @ a.T + 0.05 * np.eye(2)
    return Belief(Vec2(centre.x + float(offset[0]), centre.y + float(offset[1])), cov)


def run_planner_oracle(
    instances: int = 50,
    seed: int = 0,
    base: Optional[SimConfig] = None,
) -> OracleReport:
    """
    Compare plan(epsilon=0, sigma=0) with plan_exhaustive on random instances.

    Instances have delta <= 3, at most 6 controls and at most 3 BMAVs; FoV,
    noise models and arena come from base.

    Args:
        instances: Number of random instances
        seed: Seed of the instance generator
        base: Configuration providing the sensor and noise models

    Returns:
        OracleReport listing every instance whose scores differ by more than 1e-9
    """
    cfg = base or SimConfig()
    arena: Arena = cfg.arena
    rng = np.random.default_rng(seed)
    exact = PruneParams(epsilon=0.0, sigma=0.0, psd_tolerance=cfg.prune.psd_tolerance)
    report = OracleReport(instances)

    for k in range(instances):
        delta = int(rng.integers(1, 4))
        controls = _random_controls(rng)
        centre = Vec2(
            float(rng.uniform(0.3, 0.7) * arena.length),
            float(rng.uniform(0.3, 0.7) * arena.width),
        )
        start = Pose(centre, float(rng.uniform(-math.pi, math.pi)))
        n_group = int(rng.integers(1, 4))
        group = [_random_belief(rng, centre) for _ in range(n_group)]
        commands = [BmavCommand(*(float(v) for v in rng.uniform(-0.5, 0.5, size=2))) for _ in range(n_group)]

        kwargs = dict(
            start=start,
            group=group,
            group_commands=commands,
            delta=delta,
            controls=controls,
            fov=cfg.fov,
            mnoise=cfg.mnoise,
            onoise=cfg.onoise,
            arena=arena,
            dt=cfg.dt,
            indicator=cfg.indicator,
        )
        pruned = plan(prune=exact, **kwargs)
        exhaustive = plan_exhaustive(**kwargs)
        diff = abs(pruned.predicted_terminal_score - exhaustive.predicted_terminal_score)
        report.max_abs_diff = max(report.max_abs_diff, diff)
        if diff > SCORE_TOLERANCE:
            report.mismatches.append(
                OracleMismatch(k, pruned.predicted_terminal_score, exhaustive.predicted_terminal_score)
            )
            logger.warning(
                f"instance {k}: pruned {pruned.predicted_terminal_score!r} "
                f"vs exhaustive {exhaustive.predicted_terminal_score!r}"
            )

    logger.info(
        f"Planner oracle: {instances - len(report.mismatches)}/{instances} instances agree "
        f"(max |diff| {report.max_abs_diff:.3g})"
    )
    return report
