import math
from dataclasses import replace
from pathlib import Path

import pytest
import yaml

from src.logic.config_loader import (
    DEFAULT_CONFIG,
    DEFAULT_SEEDS,
    DEFAULT_SWEEP_VALUES,
    OUTPUT_DIR_ENV,
    Experiment,
    apply_sweep,
    config_to_dict,
    experiment_to_dict,
    get_app_title,
    get_menu_items,
    load_config,
    load_experiment,
    parse_config,
)
from src.logic.errors import ConfigError
from src.logic.geometry import Pose, Vec2
from src.logic.navigation import Destination, potential_command
from src.logic.simulator import Mission, SimConfig, Strategy

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


def test_empty_document_gives_defaults():
    e = parse_config("")
    assert e.base == SimConfig()
    assert e.base.arena.length == 8.0 and e.base.arena.width == 8.0
    assert (e.base.n_amav, e.base.n_bmav, e.base.duration) == (3, 9, 420.0)
    assert e.base.strategy is Strategy.HSWARM
    assert e.seeds == DEFAULT_SEEDS == tuple(range(1, 11))
    assert e.sweep is None
    assert e.resolved_time_grid() == (60.0, 120.0, 180.0, 240.0, 300.0, 360.0, 420.0)


def test_epsilon_passes_through():
    e = parse_config("planner:\n  epsilon: 0.4\n")
    assert e.base.prune.epsilon == 0.4


def test_zero_amavs_is_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config("simulation:\n  n_amav: 0\n")
    assert any("n_amav must be >= 1" in p for p in err.value.problems)


def test_every_problem_is_reported():
    doc = """
simulation:
  n_bmav: 0
  delta: 0
  colour: red
planner:
  epsilon: -1
extra: {}
"""
    with pytest.raises(ConfigError) as err:
        parse_config(doc)
    text = "\n".join(err.value.problems)
    assert "n_bmav" in text
    assert "delta" in text
    assert "colour" in text
    assert "epsilon" in text
    assert "extra" in text


def test_yaml_syntax_error_carries_line():
    with pytest.raises(ConfigError) as err:
        parse_config("simulation:\n  n_amav: 3\n  n_bmav: [1, 2\n")
    assert err.value.line is not None
    assert err.value.line >= 3


def test_wrong_types_are_reported():
    with pytest.raises(ConfigError) as err:
        parse_config("simulation:\n  n_amav: three\n  duration: true\n")
    text = "\n".join(err.value.problems)
    assert "simulation.n_amav must be an integer" in text
    assert "simulation.duration must be a number" in text


def test_full_document():
    doc = """
simulation: {n_amav: 2, n_bmav: 2, duration: 90, strategy: station, mission: random_walk}
fov: {angle_deg: 90}
scenario:
  bmav_starts: [[1, 1], [2, 2]]
  destinations: [[7, 7], [6, 7]]
  station_poses: [[4, 4, 0.0], [2, 6, 3.0]]
navigation:
  obstacles: [{x: 4, y: 2, radius: 0.5}]
experiment:
  seeds: [5, 6]
  sweep: {key: range_noise, values: [0.0, 0.1]}
  time_grid: [30, 90]
"""
    e = parse_config(doc)
    assert e.base.strategy is Strategy.STATION
    assert e.base.mission is Mission.RANDOM_WALK
    assert e.base.fov.angle == pytest.approx(math.pi / 2)
    assert e.base.bmav_starts == (Vec2(1.0, 1.0), Vec2(2.0, 2.0))
    assert e.base.station_poses[1] == Pose(Vec2(2.0, 6.0), 3.0)
    assert e.base.obstacles == ((Vec2(4.0, 2.0), 0.5),)
    assert e.seeds == (5, 6)
    assert e.sweep.key == "range_noise"
    assert e.resolved_time_grid() == (30.0, 90.0)


def test_scenario_length_mismatch_is_rejected():
    doc = "simulation: {n_bmav: 3}\nscenario:\n  destinations: [[1, 1]]\n"
    with pytest.raises(ConfigError) as err:
        parse_config(doc)
    assert "scenario.destinations needs 3 entries (got 1)" in err.value.problems


def test_sweep_defaults_and_validation():
    e = parse_config("experiment:\n  sweep: {key: n_amav}\n")
    assert e.sweep.values == DEFAULT_SWEEP_VALUES["n_amav"]
    assert 1.2 in DEFAULT_SWEEP_VALUES["epsilon"]

    with pytest.raises(ConfigError):
        parse_config("experiment:\n  sweep: {key: wind_speed, values: [1]}\n")
    with pytest.raises(ConfigError) as err:
        parse_config("experiment:\n  sweep: {key: n_amav, values: [2, 0]}\n")
    assert any("n_amav=0" in p for p in err.value.problems)


def test_apply_sweep():
    base = SimConfig()
    assert apply_sweep(base, "strategy", "dead_reckoning").strategy is Strategy.DEAD_RECKONING
    assert apply_sweep(base, "motion_noise", 0.3).mnoise.sigma_frac == 0.3
    assert apply_sweep(base, "range_noise", 0.05).onoise.range_frac == 0.05
    assert apply_sweep(base, None, None) is base


def test_config_document_reproduces_the_run():
    cfg = replace(
        parse_config("simulation: {n_bmav: 2}\nscenario:\n  bmav_starts: [[1, 1], [2, 2]]\n").base,
        master_seed=17,
    )
    doc = config_to_dict(cfg)
    again = parse_config(yaml.safe_dump(doc))
    assert again.seeds == (17,)
    assert replace(again.base, fov=cfg.fov, master_seed=17) == cfg
    assert again.base.fov.angle == pytest.approx(cfg.fov.angle, rel=1e-15)


def test_experiment_document_round_trips_through_yaml():
    e = parse_config("experiment:\n  seeds: [3, 4]\n  sweep: {key: strategy}\n")
    again = parse_config(yaml.safe_dump(experiment_to_dict(e)))
    assert again.seeds == e.seeds
    assert again.sweep == e.sweep
    assert replace(again.base, fov=e.base.fov) == e.base


def test_load_experiment_honours_output_env(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    path = tmp_path / "exp.yaml"
    path.write_text("experiment:\n  output_dir: from_file\n", encoding="utf-8")
    assert load_experiment(str(path)).output_dir == "from_file"

    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "from_env"))
    assert load_experiment(str(path)).output_dir == str(tmp_path / "from_env")


def test_load_experiment_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment(str(tmp_path / "nope.yaml"))


def test_shipped_documents_are_valid():
    for name in ("experiment.yaml", "examples/localization.yaml", "examples/epsilon_sweep.yaml"):
        assert isinstance(load_experiment(str(CONFIG_DIR / name)), Experiment)


def test_load_config_missing_file_uses_defaults(tmp_path):
    assert load_config(str(tmp_path / "missing.yaml")) == DEFAULT_CONFIG


def test_load_config_malformed_file_uses_defaults(tmp_path):
    path = tmp_path / "app.yaml"
    path.write_text("app_title: [unclosed\n", encoding="utf-8")
    assert load_config(str(path)) == DEFAULT_CONFIG


def test_load_config_rejects_duplicate_menu_ids(tmp_path):
    path = tmp_path / "app.yaml"
    path.write_text(
        "menu_items:\n"
        "  - {id: a, label: A, page: src.ui.pages.home}\n"
        "  - {id: a, label: B, page: src.ui.pages.about}\n",
        encoding="utf-8",
    )
    assert load_config(str(path)) == DEFAULT_CONFIG


def test_load_config_merges_over_defaults(tmp_path):
    path = tmp_path / "app.yaml"
    path.write_text("app_title: Swarm Lab\n", encoding="utf-8")
    config = load_config(str(path))
    assert get_app_title(config) == "Swarm Lab"
    assert get_menu_items(config) == DEFAULT_CONFIG["menu_items"]


def test_shipped_app_config_loads():
    config = load_config(str(CONFIG_DIR / "app.yaml"))
    ids = [item["id"] for item in get_menu_items(config)]
    assert ids == ["home", "simulation", "experiment", "about"]


def test_shipped_attract_gain_is_capped_by_the_command_horizon():
    cfg = load_experiment(str(CONFIG_DIR / "experiment.yaml")).base
    assert cfg.nav.attract_gain == 0.5
    horizon = cfg.delta * cfg.dt
    v = potential_command(Vec2(0, 0), Destination(Vec2(1, 0)), [], cfg.nav, horizon=horizon)
    assert horizon == 5.0
    assert v.vx == pytest.approx(0.2)
    assert v.vy == 0.0
