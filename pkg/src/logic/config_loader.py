"""
Configuration loading.

Two kinds of document are handled here: the workbench configuration
(config/app.yaml, merged over built-in defaults with fallback when missing or
malformed) and experiment documents, which are parsed strictly into an
Experiment with every problem reported at once.
"""
import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import yaml

from src.logic.errors import ConfigError, InvalidArgumentError
from src.logic.geometry import Arena, FovParams, Pose, Vec2, normalize_angle
from src.logic.navigation import NavParams
from src.logic.noise import MotionNoiseParams, ObservationNoiseParams
from src.logic.planning import ControlSetParams, PruneParams
from src.logic.simulator import Mission, SimConfig, Strategy, validate_config

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "HSWARM_OUTPUT_DIR"

# Built-in default workbench configuration
DEFAULT_CONFIG = {
    "app_title": "H-Swarm Workbench",
    "experiment_path": "config/experiment.yaml",
    "menu_items": [
        {"id": "home", "label": "Home", "icon": "🏠", "page": "src.ui.pages.home"},
        {"id": "simulation", "label": "Single Run", "icon": "🛰️", "page": "src.ui.pages.simulation"},
        {"id": "experiment", "label": "Experiment", "icon": "📊", "page": "src.ui.pages.experiment"},
        {"id": "about", "label": "About", "icon": "ℹ️", "page": "src.ui.pages.about"},
    ],
}

SWEEP_KEYS = ("n_amav", "n_bmav", "motion_noise", "range_noise", "epsilon", "strategy", "delta")

DEFAULT_SWEEP_VALUES: Dict[str, Tuple[Any, ...]] = {
    "n_amav": (1, 3, 5, 7),
    "n_bmav": (12, 16, 20, 24, 28),
    "motion_noise": (0.10, 0.15, 0.20, 0.25, 0.30),
    "range_noise": (0.0, 0.05, 0.10, 0.15, 0.20),
    "epsilon": (0.0, 0.4, 0.8, 1.2, 1.6, 2.0),
    "strategy": ("hswarm", "station", "dead_reckoning"),
    "delta": (1, 3, 5, 7),
}

DEFAULT_SEEDS = tuple(range(1, 11))
DEFAULT_ACCURACY_GRID = (0.2, 0.4, 0.6, 0.8)
TIME_GRID_STEP = 60.0


@dataclass(frozen=True)
class Sweep:
    key: str
    values: Tuple[Any, ...]


@dataclass(frozen=True)
class Experiment:
    """A batch of runs: the base configuration swept over one key and a list of seeds."""

    base: SimConfig = field(default_factory=SimConfig)
    sweep: Optional[Sweep] = None
    seeds: Tuple[int, ...] = DEFAULT_SEEDS
    output_dir: str = "results"
    workers: int = 1
    record_timing: bool = False
    accuracy_grid: Tuple[float, ...] = DEFAULT_ACCURACY_GRID
    time_grid: Tuple[float, ...] = ()

    def sweep_values(self) -> Tuple[Any, ...]:
        return self.sweep.values if self.sweep else (None,)

    def resolved_time_grid(self) -> Tuple[float, ...]:
        """Explicit grid, or every 60 s up to the run duration."""
        if self.time_grid:
            return self.time_grid
        n = int(self.base.duration // TIME_GRID_STEP)
        return tuple(TIME_GRID_STEP * (k + 1) for k in range(n)) or (self.base.duration,)


def apply_sweep(base: SimConfig, key: Optional[str], value: Any) -> SimConfig:
    """
    Configuration of one sweep point.

    Args:
        base: Configuration the sweep starts from
        key: One of SWEEP_KEYS, or None for no sweep
        value: Sweep value for this point

    Returns:
        A new SimConfig with the swept field replaced
    """
    if key is None:
        return base
    if key == "n_amav":
        return replace(base, n_amav=int(value))
    if key == "n_bmav":
        return replace(base, n_bmav=int(value))
    if key == "motion_noise":
        return replace(base, mnoise=replace(base.mnoise, sigma_frac=float(value)))
    if key == "range_noise":
        return replace(base, onoise=replace(base.onoise, range_frac=float(value)))
    if key == "epsilon":
        return replace(base, prune=replace(base.prune, epsilon=float(value)))
    if key == "strategy":
        return replace(base, strategy=Strategy.parse(value))
    if key == "delta":
        return replace(base, delta=int(value))
    raise InvalidArgumentError(f"unknown sweep key {key!r}; choose from {list(SWEEP_KEYS)}")


# ---------------------------------------------------------------------------
# Workbench configuration
# ---------------------------------------------------------------------------


def load_config(config_path: str = "config/app.yaml") -> Dict[str, Any]:
    """
    Load workbench configuration from YAML with fallback to defaults.

    Args:
        config_path: Path to configuration file

    Returns:
        Configuration dictionary with all required fields
    """
    config_file = Path(config_path)
    if not config_file.exists():
        logger.warning(f"Config file {config_path} not found, using defaults")
        return dict(DEFAULT_CONFIG)

    try:
        with open(config_file, 'r', encoding='utf-8') as f:
            user_config = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        logger.warning(f"Failed to parse {config_path}: {e}. Using defaults")
        return dict(DEFAULT_CONFIG)

    if user_config is None:
        logger.warning(f"Config file {config_path} is empty, using defaults")
        return dict(DEFAULT_CONFIG)
    if not isinstance(user_config, dict):
        logger.warning(f"Config file {config_path} is not a mapping, using defaults")
        return dict(DEFAULT_CONFIG)

    config = dict(DEFAULT_CONFIG)
    config.update(user_config)
    if not _validate_app_config(config):
        logger.warning("Config validation failed, using defaults")
        return dict(DEFAULT_CONFIG)

    logger.info(f"Configuration loaded from {config_path}")
    return config


def _validate_app_config(config: Dict[str, Any]) -> bool:
    if not config.get("app_title"):
        return False
    items = config.get("menu_items")
    if not isinstance(items, list) or not items:
        return False
    menu_ids = set()
    for item in items:
        if not isinstance(item, dict):
            return False
        if "id" not in item or "label" not in item or "page" not in item:
            return False
        if item["id"] in menu_ids:
            logger.warning(f"Duplicate menu ID: {item['id']}")
            return False
        menu_ids.add(item["id"])
    return True


def get_menu_items(config: Dict[str, Any]) -> List[Dict[str, str]]:
    """Extract menu items from configuration."""
    return config.get("menu_items", DEFAULT_CONFIG["menu_items"])


def get_app_title(config: Dict[str, Any]) -> str:
    """Extract app title from configuration."""
    return config.get("app_title", DEFAULT_CONFIG["app_title"])


def get_experiment_path(config: Dict[str, Any]) -> str:
    """Path of the experiment document the workbench opens with."""
    return config.get("experiment_path", DEFAULT_CONFIG["experiment_path"])


# ---------------------------------------------------------------------------
# Experiment documents
# ---------------------------------------------------------------------------


class _Reader:
    """Typed access to one section of a document, collecting problems instead of raising."""

    def __init__(self, name: str, section: Any, known: Sequence[str], problems: List[str]):
        self.name = name
        self.problems = problems
        if section is None:
            section = {}
        if not isinstance(section, dict):
            problems.append(f"{name} must be a mapping")
            section = {}
        unknown = sorted(str(k) for k in section if k not in known)
        if unknown:
            problems.append(f"{name}: unknown keys {unknown}")
        self.section = section

    def has(self, key: str) -> bool:
        return key in self.section

    def _get(self, key: str, default: Any, convert: Callable[[str, Any], Any]) -> Any:
        if key not in self.section:
            return default
        try:
            return convert(f"{self.name}.{key}", self.section[key])
        except _BadValue as e:
            self.problems.append(str(e))
            return default

    def number(self, key: str, default: float) -> float:
        return self._get(key, default, _to_float)

    def integer(self, key: str, default: int) -> int:
        return self._get(key, default, _to_int)

    def text(self, key: str, default: str) -> str:
        return self._get(key, default, _to_text)

    def flag(self, key: str, default: bool) -> bool:
        return self._get(key, default, _to_bool)

    def numbers(self, key: str, default: Tuple[float, ...]) -> Tuple[float, ...]:
        return self._get(key, default, lambda n, v: tuple(_to_float(f"{n}[{k}]", x) for k, x in enumerate(_to_list(n, v))))

    def integers(self, key: str, default: Tuple[int, ...]) -> Tuple[int, ...]:
        return self._get(key, default, lambda n, v: tuple(_to_int(f"{n}[{k}]", x) for k, x in enumerate(_to_list(n, v))))

    def points(self, key: str) -> Optional[Tuple[Vec2, ...]]:
        return self._get(key, None, _to_points)

    def poses(self, key: str) -> Optional[Tuple[Pose, ...]]:
        return self._get(key, None, _to_poses)

    def raw(self, key: str) -> Any:
        return self.section.get(key)


class _BadValue(Exception):
    pass


def _to_float(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _BadValue(f"{name} must be a number (got {value!r})")
    if not math.isfinite(value):
        raise _BadValue(f"{name} must be finite (got {value!r})")
    return float(value)


def _to_int(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _BadValue(f"{name} must be an integer (got {value!r})")
    return int(value)


def _to_text(name: str, value: Any) -> str:
    if not isinstance(value, str):
        raise _BadValue(f"{name} must be a string (got {value!r})")
    return value


def _to_bool(name: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise _BadValue(f"{name} must be true or false (got {value!r})")
    return value


def _to_list(name: str, value: Any) -> list:
    if not isinstance(value, list):
        raise _BadValue(f"{name} must be a list (got {value!r})")
    return value


def _to_points(name: str, value: Any) -> Tuple[Vec2, ...]:
    points = []
    for k, item in enumerate(_to_list(name, value)):
        if not isinstance(item, list) or len(item) != 2:
            raise _BadValue(f"{name}[{k}] must be [x, y] (got {item!r})")
        points.append(Vec2(_to_float(f"{name}[{k}].x", item[0]), _to_float(f"{name}[{k}].y", item[1])))
    return tuple(points)


def _to_poses(name: str, value: Any) -> Tuple[Pose, ...]:
    poses = []
    for k, item in enumerate(_to_list(name, value)):
        if not isinstance(item, list) or len(item) != 3:
            raise _BadValue(f"{name}[{k}] must be [x, y, heading] (got {item!r})")
        x, y, h = (_to_float(f"{name}[{k}]", v) for v in item)
        poses.append(Pose(Vec2(x, y), normalize_angle(h)))
    return tuple(poses)


_SECTIONS: Dict[str, Tuple[str, ...]] = {
    "simulation": (
        "arena_length", "arena_width", "n_amav", "n_bmav", "duration", "dt", "delta",
        "strategy", "mission", "grouping", "destination_accuracy",
    ),
    "fov": ("angle_deg", "r_max"),
    "motion_noise": ("sigma_frac", "sigma_floor"),
    "observation_noise": ("range_frac", "bearing_frac", "bearing_floor"),
    "planner": ("speeds", "turn_rates", "epsilon", "sigma", "psd_tolerance", "indicator"),
    "navigation": ("v_max", "attract_gain", "repulse_gain", "obstacle_radius", "arrival_radius", "obstacles"),
    "scenario": ("destinations", "bmav_starts", "amav_starts", "station_poses"),
    "experiment": ("seeds", "sweep", "output_dir", "workers", "record_timing", "accuracy_grid", "time_grid"),
}


def _build(problems: List[str], section: str, factory: Callable, **kwargs):
    try:
        return factory(**kwargs)
    except InvalidArgumentError as e:
        problems.append(f"{section}: {e}")
        return factory()


def _parse_obstacles(nav: _Reader) -> Tuple[Tuple[Vec2, float], ...]:
    raw = nav.raw("obstacles")
    if raw is None:
        return ()
    if not isinstance(raw, list):
        nav.problems.append("navigation.obstacles must be a list of {x, y, radius}")
        return ()
    obstacles = []
    for k, item in enumerate(raw):
        name = f"navigation.obstacles[{k}]"
        if not isinstance(item, dict) or set(item) != {"x", "y", "radius"}:
            nav.problems.append(f"{name} must have exactly the keys x, y, radius")
            continue
        try:
            centre = Vec2(_to_float(f"{name}.x", item["x"]), _to_float(f"{name}.y", item["y"]))
            obstacles.append((centre, _to_float(f"{name}.radius", item["radius"])))
        except _BadValue as e:
            nav.problems.append(str(e))
    return tuple(obstacles)


def _parse_sweep(exp: _Reader) -> Optional[Sweep]:
    raw = exp.raw("sweep")
    if raw is None:
        return None
    if not isinstance(raw, dict):
        exp.problems.append("experiment.sweep must be a mapping with key and values")
        return None
    unknown = sorted(str(k) for k in raw if k not in ("key", "values"))
    if unknown:
        exp.problems.append(f"experiment.sweep: unknown keys {unknown}")
    key = raw.get("key")
    if key not in SWEEP_KEYS:
        exp.problems.append(f"experiment.sweep.key must be one of {list(SWEEP_KEYS)} (got {key!r})")
        return None
    values = raw.get("values")
    if values is None:
        return Sweep(key, DEFAULT_SWEEP_VALUES[key])
    if not isinstance(values, list) or not values:
        exp.problems.append("experiment.sweep.values must be a non-empty list")
        return None
    return Sweep(key, tuple(values))


def _sim_config(doc: Dict[str, Any], problems: List[str]) -> SimConfig:
    d = SimConfig()
    sim = _Reader("simulation", doc.get("simulation"), _SECTIONS["simulation"], problems)
    fov = _Reader("fov", doc.get("fov"), _SECTIONS["fov"], problems)
    mn = _Reader("motion_noise", doc.get("motion_noise"), _SECTIONS["motion_noise"], problems)
    on = _Reader("observation_noise", doc.get("observation_noise"), _SECTIONS["observation_noise"], problems)
    pl = _Reader("planner", doc.get("planner"), _SECTIONS["planner"], problems)
    nav = _Reader("navigation", doc.get("navigation"), _SECTIONS["navigation"], problems)
    sc = _Reader("scenario", doc.get("scenario"), _SECTIONS["scenario"], problems)

    fov_angle = d.fov.angle
    if fov.has("angle_deg"):
        fov_angle = math.radians(fov.number("angle_deg", math.degrees(d.fov.angle)))

    strategy = d.strategy
    if sim.has("strategy"):
        try:
            strategy = Strategy.parse(sim.text("strategy", d.strategy.value))
        except ValueError:
            problems.append(
                f"simulation.strategy must be one of {[s.value for s in Strategy]} (got {sim.raw('strategy')!r})"
            )
    mission = d.mission
    if sim.has("mission"):
        try:
            mission = Mission(sim.text("mission", d.mission.value))
        except ValueError:
            problems.append(
                f"simulation.mission must be one of {[m.value for m in Mission]} (got {sim.raw('mission')!r})"
            )

    return SimConfig(
        arena=_build(
            problems, "simulation", Arena,
            length=sim.number("arena_length", d.arena.length),
            width=sim.number("arena_width", d.arena.width),
        ),
        n_amav=sim.integer("n_amav", d.n_amav),
        n_bmav=sim.integer("n_bmav", d.n_bmav),
        duration=sim.number("duration", d.duration),
        dt=sim.number("dt", d.dt),
        delta=sim.integer("delta", d.delta),
        fov=_build(
            problems, "fov", FovParams,
            angle=fov_angle,
            r_max=fov.number("r_max", d.fov.r_max),
        ),
        mnoise=_build(
            problems, "motion_noise", MotionNoiseParams,
            sigma_frac=mn.number("sigma_frac", d.mnoise.sigma_frac),
            sigma_floor=mn.number("sigma_floor", d.mnoise.sigma_floor),
        ),
        onoise=_build(
            problems, "observation_noise", ObservationNoiseParams,
            range_frac=on.number("range_frac", d.onoise.range_frac),
            bearing_frac=on.number("bearing_frac", d.onoise.bearing_frac),
            bearing_floor=on.number("bearing_floor", d.onoise.bearing_floor),
        ),
        controls=_build(
            problems, "planner", ControlSetParams,
            speeds=pl.numbers("speeds", d.controls.speeds),
            turn_rates=pl.numbers("turn_rates", d.controls.turn_rates),
        ),
        prune=_build(
            problems, "planner", PruneParams,
            epsilon=pl.number("epsilon", d.prune.epsilon),
            sigma=pl.number("sigma", d.prune.sigma),
            psd_tolerance=pl.number("psd_tolerance", d.prune.psd_tolerance),
        ),
        nav=_build(
            problems, "navigation", NavParams,
            v_max=nav.number("v_max", d.nav.v_max),
            attract_gain=nav.number("attract_gain", d.nav.attract_gain),
            repulse_gain=nav.number("repulse_gain", d.nav.repulse_gain),
            obstacle_radius=nav.number("obstacle_radius", d.nav.obstacle_radius),
            arrival_radius=nav.number("arrival_radius", d.nav.arrival_radius),
        ),
        strategy=strategy,
        mission=mission,
        grouping=sim.text("grouping", d.grouping),
        indicator=pl.text("indicator", d.indicator),
        destination_accuracy=sim.number("destination_accuracy", d.destination_accuracy),
        destinations=sc.points("destinations"),
        bmav_starts=sc.points("bmav_starts"),
        amav_starts=sc.poses("amav_starts"),
        station_poses=sc.poses("station_poses"),
        obstacles=_parse_obstacles(nav),
    )


def _validate_experiment(e: Experiment, problems: List[str]) -> None:
    problems.extend(validate_config(e.base))
    if not e.seeds:
        problems.append("experiment.seeds must not be empty")
    if len(set(e.seeds)) != len(e.seeds):
        problems.append("experiment.seeds must be distinct")
    if any(s < 0 for s in e.seeds):
        problems.append("experiment.seeds must be non-negative")
    if e.workers < 1:
        problems.append(f"experiment.workers must be >= 1 (got {e.workers})")
    if not e.output_dir:
        problems.append("experiment.output_dir must not be empty")
    if any(not a > 0 for a in e.accuracy_grid):
        problems.append("experiment.accuracy_grid entries must be positive")
    if any(not 0 < t <= e.base.duration for t in e.time_grid):
        problems.append(f"experiment.time_grid entries must lie in (0, {e.base.duration:g}]")
    if e.sweep is not None:
        for value in e.sweep.values:
            try:
                point = apply_sweep(e.base, e.sweep.key, value)
            except (TypeError, ValueError) as err:
                problems.append(f"experiment.sweep value {value!r} is invalid for {e.sweep.key}: {err}")
                continue
            for p in validate_config(point):
                problems.append(f"sweep {e.sweep.key}={value!r}: {p}")


def parse_config(text: str) -> Experiment:
    """
    Parse and validate an experiment document.

    Args:
        text: YAML document; an empty document yields all defaults

    Returns:
        Fully validated Experiment

    Raises:
        ConfigError: With the line number on YAML syntax errors, or with
            every violated invariant on semantic errors
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        reason = getattr(e, "problem", None) or str(e)
        raise ConfigError([f"YAML syntax error: {reason}"], line=line) from e

    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(["document must be a mapping of sections"])

    problems: List[str] = []
    unknown = sorted(str(k) for k in doc if k not in _SECTIONS)
    if unknown:
        problems.append(f"unknown sections {unknown}")

    base = _sim_config(doc, problems)
    exp = _Reader("experiment", doc.get("experiment"), _SECTIONS["experiment"], problems)
    defaults = Experiment()
    experiment = Experiment(
        base=base,
        sweep=_parse_sweep(exp),
        seeds=exp.integers("seeds", defaults.seeds),
        output_dir=exp.text("output_dir", defaults.output_dir),
        workers=exp.integer("workers", defaults.workers),
        record_timing=exp.flag("record_timing", defaults.record_timing),
        accuracy_grid=exp.numbers("accuracy_grid", defaults.accuracy_grid),
        time_grid=exp.numbers("time_grid", defaults.time_grid),
    )
    _validate_experiment(experiment, problems)
    if problems:
        raise ConfigError(problems)
    return experiment


def load_experiment(path: str) -> Experiment:
    """
    Read and parse an experiment document, applying the output-dir environment override.

    Args:
        path: Path of the YAML document

    Returns:
        Validated Experiment
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([f"cannot read {path}: {e}"]) from e
    experiment = parse_config(text)
    env_out = os.environ.get(OUTPUT_DIR_ENV)
    if env_out:
        logger.debug(f"{OUTPUT_DIR_ENV} overrides output_dir with {env_out}")
        experiment = replace(experiment, output_dir=env_out)
    logger.info(f"Experiment loaded from {path}")
    return experiment


def _points(points: Optional[Sequence[Vec2]]) -> Optional[List[List[float]]]:
    return None if points is None else [[q.x, q.y] for q in points]


def _poses(poses: Optional[Sequence[Pose]]) -> Optional[List[List[float]]]:
    return None if poses is None else [[p.position.x, p.position.y, p.heading] for p in poses]


def config_to_dict(cfg: SimConfig) -> Dict[str, Any]:
    """
    Render a resolved configuration as a document parse_config accepts.

    The master seed goes into experiment.seeds, so the document alone
    reproduces the run.
    """
    scenario = {
        key: value
        for key, value in (
            ("destinations", _points(cfg.destinations)),
            ("bmav_starts", _points(cfg.bmav_starts)),
            ("amav_starts", _poses(cfg.amav_starts)),
            ("station_poses", _poses(cfg.station_poses)),
        )
        if value is not None
    }
    return {
        "simulation": {
            "arena_length": cfg.arena.length,
            "arena_width": cfg.arena.width,
            "n_amav": cfg.n_amav,
            "n_bmav": cfg.n_bmav,
            "duration": cfg.duration,
            "dt": cfg.dt,
            "delta": cfg.delta,
            "strategy": cfg.strategy.value,
            "mission": cfg.mission.value,
            "grouping": cfg.grouping,
            "destination_accuracy": cfg.destination_accuracy,
        },
        "fov": {"angle_deg": math.degrees(cfg.fov.angle), "r_max": cfg.fov.r_max},
        "motion_noise": {"sigma_frac": cfg.mnoise.sigma_frac, "sigma_floor": cfg.mnoise.sigma_floor},
        "observation_noise": {
            "range_frac": cfg.onoise.range_frac,
            "bearing_frac": cfg.onoise.bearing_frac,
            "bearing_floor": cfg.onoise.bearing_floor,
        },
        "planner": {
            "speeds": list(cfg.controls.speeds),
            "turn_rates": list(cfg.controls.turn_rates),
            "epsilon": cfg.prune.epsilon,
            "sigma": cfg.prune.sigma,
            "psd_tolerance": cfg.prune.psd_tolerance,
            "indicator": cfg.indicator,
        },
        "navigation": {
            "v_max": cfg.nav.v_max,
            "attract_gain": cfg.nav.attract_gain,
            "repulse_gain": cfg.nav.repulse_gain,
            "obstacle_radius": cfg.nav.obstacle_radius,
            "arrival_radius": cfg.nav.arrival_radius,
            "obstacles": [{"x": c.x, "y": c.y, "radius": r} for c, r in cfg.obstacles],
        },
        "scenario": scenario,
        "experiment": {"seeds": [cfg.master_seed]},
    }


def experiment_to_dict(e: Experiment) -> Dict[str, Any]:
    """Document form of a whole Experiment."""
    doc = config_to_dict(e.base)
    doc["experiment"] = {
        "seeds": list(e.seeds),
        "output_dir": e.output_dir,
        "workers": e.workers,
        "record_timing": e.record_timing,
        "accuracy_grid": list(e.accuracy_grid),
    }
    if e.time_grid:
        doc["experiment"]["time_grid"] = list(e.time_grid)
    if e.sweep is not None:
        doc["experiment"]["sweep"] = {"key": e.sweep.key, "values": list(e.sweep.values)}
    return doc
