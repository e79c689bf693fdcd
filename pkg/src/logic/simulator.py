"""
Ground-truth world evolution and strategy orchestration.

One call to run_simulation steps the world at dt for the configured
duration: BMAV commands, groups and AMAV plans are refreshed every delta
steps, BMAV truth moves with actuation noise, beliefs integrate the
commanded velocity, AMAVs move (H-Swarm), stay put (Station) or are absent
(Dead Reckoning), and every AMAV that sees a BMAV corrects its belief.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from src.logic.errors import (
    ConfigError,
    DegenerateGeometryError,
    InvalidArgumentError,
    NumericalDegeneracyError,
)
from src.logic.estimation import (
    Belief,
    Observation,
    correct,
    observe_ideal,
    predict,
    uncertainty,
)
from src.logic.geometry import (
    HOVER,
    AmavControl,
    Arena,
    BmavCommand,
    FovParams,
    Pose,
    Vec2,
    amav_step,
    bmav_step,
    in_fov,
    normalize_angle,
)
from src.logic.grouping import GroupAssignment, assign_all, assign_groups
from src.logic.navigation import Destination, NavParams, Obstacle, potential_command, reached
from src.logic.noise import (
    MotionNoiseParams,
    ObservationNoiseParams,
    RngStream,
    StreamTag,
    derive_stream,
    sample_motion_noise,
    sample_observation_noise,
)
from src.logic.planning import ControlSetParams, Plan, PruneParams, plan

logger = logging.getLogger(__name__)

MIN_MEASURED_RANGE = 1e-6
WALL_MARGIN = 0.5
RANDOM_WALK_DRAWS = 32
TRACE_COLUMNS = ["t", "kind", "id", "x", "y", "heading", "est_x", "est_y", "trace_sigma", "observed_by"]


class Strategy(str, Enum):
    HSWARM = "hswarm"
    STATION = "station"
    DEAD_RECKONING = "dead_reckoning"

    @classmethod
    def parse(cls, value: str) -> "Strategy":
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"deadreckoning": cls.DEAD_RECKONING, "h_swarm": cls.HSWARM}
        if key in aliases:
            return aliases[key]
        return cls(key)


class Mission(str, Enum):
    NAVIGATE = "navigate"
    RANDOM_WALK = "random_walk"


@dataclass(frozen=True)
class SimConfig:
    """Everything a single run depends on; a run is a pure function of this value."""

    arena: Arena = field(default_factory=Arena)
    n_amav: int = 3
    n_bmav: int = 9
    duration: float = 420.0
    dt: float = 1.0
    delta: int = 5
    fov: FovParams = field(default_factory=FovParams)
    mnoise: MotionNoiseParams = field(default_factory=MotionNoiseParams)
    onoise: ObservationNoiseParams = field(default_factory=ObservationNoiseParams)
    controls: ControlSetParams = field(default_factory=ControlSetParams)
    prune: PruneParams = field(default_factory=PruneParams)
    nav: NavParams = field(default_factory=NavParams)
    strategy: Strategy = Strategy.HSWARM
    mission: Mission = Mission.NAVIGATE
    grouping: str = "voronoi"
    indicator: str = "trace"
    destination_accuracy: float = 0.2
    destinations: Optional[Tuple[Vec2, ...]] = None
    bmav_starts: Optional[Tuple[Vec2, ...]] = None
    amav_starts: Optional[Tuple[Pose, ...]] = None
    station_poses: Optional[Tuple[Pose, ...]] = None
    obstacles: Tuple[Obstacle, ...] = ()
    master_seed: int = 0

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))


def validate_config(cfg: SimConfig) -> List[str]:
    """
    Collect every violated invariant of a configuration.

    Returns:
        Problem messages; empty when the configuration is runnable
    """
    problems = []
    if cfg.n_amav < 1:
        problems.append(f"simulation.n_amav must be >= 1 (got {cfg.n_amav})")
    if cfg.n_bmav < 1:
        problems.append(f"simulation.n_bmav must be >= 1 (got {cfg.n_bmav})")
    if not cfg.dt > 0:
        problems.append(f"simulation.dt must be > 0 (got {cfg.dt})")
    elif cfg.duration < cfg.dt:
        problems.append(f"simulation.duration must be >= dt (got {cfg.duration} < {cfg.dt})")
    if cfg.delta < 1:
        problems.append(f"simulation.delta must be >= 1 (got {cfg.delta})")
    if cfg.grouping not in ("voronoi", "none"):
        problems.append(f"simulation.grouping must be 'voronoi' or 'none' (got {cfg.grouping!r})")
    if cfg.indicator not in ("trace", "logdet"):
        problems.append(f"planner.indicator must be 'trace' or 'logdet' (got {cfg.indicator!r})")
    if not cfg.destination_accuracy > 0:
        problems.append(f"simulation.destination_accuracy must be > 0 (got {cfg.destination_accuracy})")

    for name, points, expected in (
        ("scenario.destinations", cfg.destinations, cfg.n_bmav),
        ("scenario.bmav_starts", cfg.bmav_starts, cfg.n_bmav),
    ):
        if points is None:
            continue
        if len(points) != expected:
            problems.append(f"{name} needs {expected} entries (got {len(points)})")
        outside = [k for k, q in enumerate(points) if not cfg.arena.contains(q)]
        if outside:
            problems.append(f"{name} entries {outside} lie outside the arena")
    for name, poses in (("scenario.amav_starts", cfg.amav_starts), ("scenario.station_poses", cfg.station_poses)):
        if poses is None:
            continue
        if len(poses) != cfg.n_amav:
            problems.append(f"{name} needs {cfg.n_amav} entries (got {len(poses)})")
        outside = [k for k, p in enumerate(poses) if not cfg.arena.contains(p.position)]
        if outside:
            problems.append(f"{name} entries {outside} lie outside the arena")
    for k, (_, radius) in enumerate(cfg.obstacles):
        if not radius >= 0:
            problems.append(f"navigation.obstacles[{k}].radius must be >= 0")
    return problems


def default_scenario(n_bmav: int, arena: Arena) -> Tuple[List[Vec2], List[Vec2]]:
    """
    Corner take-off grid and edge-spread destinations.

    Starts sit on a square grid inside [0.2, 0.8]^2, within 1 m of (0.5, 0.5).
    Destinations are spaced evenly along the far edge (y = W) and then down
    the side edge (x = L).

    Args:
        n_bmav: Number of BMAVs
        arena: Arena the scenario must fit

    Returns:
        (starts, destinations), each with n_bmav distinct points
    """
    if n_bmav < 1:
        raise InvalidArgumentError(f"n_bmav must be >= 1, got {n_bmav}")
    side = math.ceil(math.sqrt(n_bmav))
    spacing = 0.6 / (side - 1) if side > 1 else 0.0
    origin = 0.2 if side > 1 else 0.5
    starts = [
        arena.clamp(Vec2(origin + (k % side) * spacing, origin + (k // side) * spacing))
        for k in range(n_bmav)
    ]

    perimeter = arena.length + arena.width
    destinations = []
    for k in range(n_bmav):
        s = (k + 0.5) * perimeter / n_bmav
        if s <= arena.length:
            destinations.append(Vec2(s, arena.width))
        else:
            destinations.append(Vec2(arena.length, arena.width - (s - arena.length)))
    return starts, destinations


def default_amav_poses(n_amav: int, arena: Arena) -> List[Pose]:
    """Cell centres of a near-square grid over the arena, each facing the arena centre."""
    cols = math.ceil(math.sqrt(n_amav))
    rows = math.ceil(n_amav / cols)
    centre = arena.center
    poses = []
    for k in range(n_amav):
        q = Vec2((k % cols + 0.5) * arena.length / cols, (k // cols + 0.5) * arena.width / rows)
        to_centre = centre - q
        heading = math.atan2(to_centre.y, to_centre.x) if to_centre.norm() > 0 else 0.0
        poses.append(Pose(q, normalize_angle(heading)))
    return poses


@dataclass
class WorldState:
    t: float
    amav_poses: List[Pose]
    bmav_truth: List[Vec2]
    beliefs: List[Belief]
    commands: List[BmavCommand]
    groups: Optional[GroupAssignment] = None
    plans: Dict[int, Plan] = field(default_factory=dict)
    plan_cursor: int = 0
    arrived: List[bool] = field(default_factory=list)
    arrival_times: List[Optional[float]] = field(default_factory=list)


@dataclass
class TraceRecord:
    """
    Per-timestep log of one run.

    bmav_rows: (t, id, truth_x, truth_y, est_x, est_y, trace_sigma, observed_by)
    amav_rows: (t, id, x, y, heading)
    """

    strategy: Strategy
    master_seed: int
    dt: float
    duration: float
    destinations: List[Vec2]
    destination_accuracy: float
    bmav_rows: List[tuple] = field(default_factory=list)
    amav_rows: List[tuple] = field(default_factory=list)
    arrival_times: List[Optional[float]] = field(default_factory=list)
    planner_ms: List[float] = field(default_factory=list)

    @property
    def n_bmav(self) -> int:
        return len(self.destinations)

    def bmav_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            self.bmav_rows,
            columns=["t", "id", "truth_x", "truth_y", "est_x", "est_y", "trace_sigma", "observed_by"],
        )

    def to_frame(self) -> pd.DataFrame:
        """Run trace in the CSV column order, AMAV rows before BMAV rows at each t."""
        rows = []
        amav_by_t: Dict[float, List[tuple]] = {}
        for t, j, x, y, heading in self.amav_rows:
            amav_by_t.setdefault(t, []).append((t, "amav", j, x, y, heading, None, None, None, None))
        emitted = set()
        for t, i, tx, ty, ex, ey, tr, obs in self.bmav_rows:
            if t not in emitted:
                rows.extend(amav_by_t.get(t, []))
                emitted.add(t)
            rows.append((t, "bmav", i, tx, ty, None, ex, ey, tr, obs))
        return pd.DataFrame(rows, columns=TRACE_COLUMNS)


class _Streams:
    """Per-entity random streams for one run."""

    def __init__(self, seed: int, n_amav: int, n_bmav: int):
        self.motion = [derive_stream(seed, i, StreamTag.MOTION) for i in range(n_bmav)]
        self.mission = [derive_stream(seed, i, StreamTag.MISSION) for i in range(n_bmav)]
        self.observation = [derive_stream(seed, j, StreamTag.OBSERVATION) for j in range(n_amav)]


def _random_walk_command(
    mean: Vec2, arena: Arena, v_max: float, horizon: float, rng: RngStream
) -> BmavCommand:
    """
    Draw a random heading whose held command keeps the mean inside the arena.

    The endpoint mean + v_max * horizon must land at least WALL_MARGIN inside
    every wall. Headings are redrawn up to RANDOM_WALK_DRAWS times; after that
    the BMAV heads for the arena centre without passing it.
    """
    margin = min(WALL_MARGIN, arena.length / 4.0, arena.width / 4.0)
    reach = v_max * horizon
    for _ in range(RANDOM_WALK_DRAWS):
        heading = rng.uniform(-math.pi, math.pi)
        end = mean + Vec2(reach * math.cos(heading), reach * math.sin(heading))
        if margin <= end.x <= arena.length - margin and margin <= end.y <= arena.width - margin:
            return BmavCommand(v_max * math.cos(heading), v_max * math.sin(heading))

    inward = arena.center - mean
    dist = math.hypot(inward.x, inward.y)
    if dist == 0.0:
        return HOVER
    speed = min(v_max, dist / horizon)
    return BmavCommand(speed * inward.x / dist, speed * inward.y / dist)


def _issue_commands(
    cfg: SimConfig, state: WorldState, destinations: Sequence[Destination], streams: _Streams
) -> None:
    for i, belief in enumerate(state.beliefs):
        if state.arrived[i]:
            state.commands[i] = HOVER
        elif cfg.mission is Mission.RANDOM_WALK:
            state.commands[i] = _random_walk_command(
                belief.mean, cfg.arena, cfg.nav.v_max, cfg.delta * cfg.dt, streams.mission[i]
            )
        else:
            state.commands[i] = potential_command(
                belief.mean, destinations[i], cfg.obstacles, cfg.nav, horizon=cfg.delta * cfg.dt
            )


def _replan_amavs(cfg: SimConfig, state: WorldState, planner_ms: List[float]) -> None:
    if cfg.grouping == "none":
        state.groups = assign_all(len(state.amav_poses), len(state.beliefs), state.t)
    else:
        state.groups = assign_groups([p.position for p in state.amav_poses], state.beliefs, state.t)

    state.plans = {}
    for j, pose in enumerate(state.amav_poses):
        members = state.groups.members(j)
        started = time.perf_counter()
        state.plans[j] = plan(
            start=pose,
            group=[state.beliefs[i] for i in members],
            group_commands=[state.commands[i] for i in members],
            delta=cfg.delta,
            controls=cfg.controls,
            prune=cfg.prune,
            fov=cfg.fov,
            mnoise=cfg.mnoise,
            onoise=cfg.onoise,
            arena=cfg.arena,
            dt=cfg.dt,
            indicator=cfg.indicator,
        )
        planner_ms.append((time.perf_counter() - started) * 1000.0)
    state.plan_cursor = 0


def _move_amavs(cfg: SimConfig, state: WorldState) -> None:
    if cfg.strategy is not Strategy.HSWARM:
        return
    moved = []
    for j, pose in enumerate(state.amav_poses):
        controls = state.plans[j].controls
        control = controls[state.plan_cursor] if state.plan_cursor < len(controls) else AmavControl(0.0, 0.0)
        nxt = amav_step(pose, control, cfg.dt)
        moved.append(Pose(cfg.arena.clamp(nxt.position), nxt.heading))
    state.amav_poses = moved
    state.plan_cursor += 1


def _observe(cfg: SimConfig, state: WorldState, streams: _Streams) -> List[List[int]]:
    observed_by: List[List[int]] = [[] for _ in state.beliefs]
    # sequential fusion in ascending AMAV index
    for j, pose in enumerate(state.amav_poses):
        for i, truth in enumerate(state.bmav_truth):
            if not in_fov(pose, truth, cfg.fov):
                continue
            ideal = observe_ideal(pose, truth)
            n_r, n_a = sample_observation_noise(ideal.range, ideal.bearing, cfg.onoise, streams.observation[j])
            z = Observation(max(ideal.range + n_r, MIN_MEASURED_RANGE), normalize_angle(ideal.bearing + n_a))
            try:
                state.beliefs[i] = correct(state.beliefs[i], z, pose, cfg.onoise)
            except (DegenerateGeometryError, NumericalDegeneracyError) as e:
                logger.debug(f"t={state.t:g}: AMAV {j} could not correct BMAV {i}: {e}")
                continue
            observed_by[i].append(j)
    return observed_by


def _record(state: WorldState, record: TraceRecord, observed_by: List[List[int]]) -> None:
    for j, pose in enumerate(state.amav_poses):
        record.amav_rows.append((state.t, j, pose.position.x, pose.position.y, pose.heading))
    for i, (truth, belief) in enumerate(zip(state.bmav_truth, state.beliefs)):
        record.bmav_rows.append(
            (
                state.t,
                i,
                truth.x,
                truth.y,
                belief.mean.x,
                belief.mean.y,
                uncertainty(belief),
                "|".join(str(j) for j in observed_by[i]),
            )
        )


def _initial_state(cfg: SimConfig) -> Tuple[WorldState, List[Destination]]:
    starts, dest_points = default_scenario(cfg.n_bmav, cfg.arena)
    if cfg.bmav_starts is not None:
        starts = list(cfg.bmav_starts)
    if cfg.destinations is not None:
        dest_points = list(cfg.destinations)
    destinations = [Destination(q, cfg.destination_accuracy) for q in dest_points]

    if cfg.strategy is Strategy.HSWARM:
        amavs = list(cfg.amav_starts or default_amav_poses(cfg.n_amav, cfg.arena))
    elif cfg.strategy is Strategy.STATION:
        amavs = list(cfg.station_poses or default_amav_poses(cfg.n_amav, cfg.arena))
    else:
        amavs = []

    state = WorldState(
        t=0.0,
        amav_poses=amavs,
        bmav_truth=list(starts),
        beliefs=[Belief.certain(q) for q in starts],
        commands=[HOVER] * cfg.n_bmav,
        arrived=[False] * cfg.n_bmav,
        arrival_times=[None] * cfg.n_bmav,
    )
    return state, destinations


def _mark_arrivals(cfg: SimConfig, state: WorldState, destinations: Sequence[Destination]) -> None:
    if cfg.mission is not Mission.NAVIGATE:
        return
    for i, truth in enumerate(state.bmav_truth):
        if not state.arrived[i] and reached(truth, destinations[i]):
            state.arrived[i] = True
            state.arrival_times[i] = state.t
            state.commands[i] = HOVER
            logger.debug(f"BMAV {i} arrived at t={state.t:g}")


def run_simulation(cfg: SimConfig) -> TraceRecord:
    """
    Run one deterministic simulation.

    Args:
        cfg: Validated configuration, including the master seed

    Returns:
        TraceRecord with one BMAV row per BMAV per timestep (t = 0 included)
    """
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)

    logger.info(
        f"Simulating {cfg.strategy.value} ({cfg.mission.value}): {cfg.n_amav} AMAVs, "
        f"{cfg.n_bmav} BMAVs, {cfg.duration:g} s, seed {cfg.master_seed}"
    )
    streams = _Streams(cfg.master_seed, cfg.n_amav, cfg.n_bmav)
    state, destinations = _initial_state(cfg)
    record = TraceRecord(
        strategy=cfg.strategy,
        master_seed=cfg.master_seed,
        dt=cfg.dt,
        duration=cfg.duration,
        destinations=[d.point for d in destinations],
        destination_accuracy=cfg.destination_accuracy,
    )
    _mark_arrivals(cfg, state, destinations)
    _record(state, record, [[] for _ in range(cfg.n_bmav)])

    for k in range(cfg.steps):
        if k % cfg.delta == 0:
            _issue_commands(cfg, state, destinations, streams)
            if cfg.strategy is Strategy.HSWARM:
                _replan_amavs(cfg, state, record.planner_ms)

        for i in range(cfg.n_bmav):
            noise = sample_motion_noise(state.commands[i], cfg.mnoise, streams.motion[i])
            state.bmav_truth[i] = bmav_step(state.bmav_truth[i], state.commands[i], noise, cfg.dt, cfg.arena)
            state.beliefs[i] = predict(state.beliefs[i], state.commands[i], cfg.dt, cfg.mnoise)

        _move_amavs(cfg, state)
        state.t = (k + 1) * cfg.dt
        observed_by = _observe(cfg, state, streams)
        _mark_arrivals(cfg, state, destinations)
        _record(state, record, observed_by)

    record.arrival_times = list(state.arrival_times)
    arrived = sum(t is not None for t in state.arrival_times)
    logger.info(f"Run finished: {arrived}/{cfg.n_bmav} BMAVs arrived, {len(record.planner_ms)} plans")
    return record
