import math
import statistics
import time

import numpy as np
import pytest

from src.logic.errors import InvalidArgumentError
from src.logic.estimation import Belief, predict, process_noise, uncertainty
from src.logic.geometry import AmavControl, Arena, BmavCommand, FovParams, Pose, Vec2, amav_step
from src.logic.noise import MotionNoiseParams, ObservationNoiseParams
from src.logic.planning import (
    ControlSetParams,
    PruneParams,
    SearchNode,
    enumerate_controls,
    expand_node,
    is_eps_redundant,
    plan,
    plan_exhaustive,
    prune_level,
    sigma_crosses,
)

FOV = FovParams()
MNOISE = MotionNoiseParams()
ONOISE = ObservationNoiseParams()
SIX_CONTROLS = ControlSetParams(speeds=(0.0, 1.0), turn_rates=(0.0, 1.0, -1.0))


def _root(pose, beliefs):
    return SearchNode(pose, tuple(beliefs), 0, (), sum(uncertainty(b) for b in beliefs))


def _random_group(rng, centre, n, cov_scale=0.5):
    group = []
    for _ in range(n):
        a = rng.normal(0.0, cov_scale, size=(2, 2))
        offset = rng.uniform(-1.5, 1.5, size=2)
        group.append(Belief(Vec2(centre.x + offset[0], centre.y + offset[1]), a @ a.T + 0.01 * np.eye(2)))
    commands = [BmavCommand(*rng.uniform(-0.3, 0.3, size=2)) for _ in range(n)]
    return group, commands


def test_enumerate_controls_defaults():
    assert len(enumerate_controls(ControlSetParams())) == 15


def test_enumerate_controls_order():
    assert enumerate_controls(ControlSetParams((0.0,), (0.0,))) == [AmavControl(0, 0)]
    assert enumerate_controls(ControlSetParams((1.0, 2.0), (0.0, 1.0))) == [
        AmavControl(1, 0),
        AmavControl(1, 1),
        AmavControl(2, 0),
        AmavControl(2, 1),
    ]


def test_expand_node_prediction_only_when_nothing_visible():
    beliefs = [Belief(Vec2(5, 5), np.eye(2) * 0.1), Belief(Vec2(6, 1), np.eye(2) * 0.2)]
    commands = [BmavCommand(0.2, 0.0), BmavCommand(0.0, 0.0)]
    node = _root(Pose(Vec2(1, 1), 0.0), beliefs)
    child = expand_node(node, AmavControl(1.0, 0.0), commands, FOV, MNOISE, ONOISE)
    q_total = sum(np.trace(process_noise(v, 1.0, MNOISE)) for v in commands)
    assert child.score == pytest.approx(node.score + q_total, abs=1e-12)
    assert child.score > node.score
    assert child.depth == 1
    assert child.controls_from_root == (AmavControl(1.0, 0.0),)


def test_expand_node_contracts_visible_belief():
    belief = Belief(Vec2(1.5, 1.0), np.eye(2))
    node = _root(Pose(Vec2(0, 1), 0.0), [belief])
    child = expand_node(node, AmavControl(1.0, 0.0), [BmavCommand(0, 0)], FOV, MNOISE, ONOISE)
    predicted_only = uncertainty(predict(belief, BmavCommand(0, 0), 1.0, MNOISE))
    assert uncertainty(child.beliefs[0]) < predicted_only


def test_expand_node_matches_hand_update():
    # BMAV 0.5 m dead ahead of a hovering AMAV, prior covariance I
    node = _root(Pose(Vec2(0, 0), 0.0), [Belief(Vec2(0.5, 0.0), np.eye(2))])
    child = expand_node(node, AmavControl(0.0, 0.0), [BmavCommand(0, 0)], FOV, MNOISE, ONOISE)

    s1 = 1.0 + 1e-4  # prior plus floor process noise
    r_range = (0.1 * 0.5) ** 2
    r_bearing = 0.01**2
    # H = diag(1, 1 / 0.5)
    post_xx = s1 * r_range / (s1 + r_range)
    post_yy = s1 * r_bearing / (4.0 * s1 + r_bearing)
    np.testing.assert_allclose(child.beliefs[0].cov, np.diag([post_xx, post_yy]), atol=1e-9)
    assert child.beliefs[0].mean == Vec2(0.5, 0.0)


def test_expand_node_rejects_mismatched_commands():
    node = _root(Pose(Vec2(0, 0), 0.0), [Belief(Vec2(1, 1), np.eye(2))])
    with pytest.raises(InvalidArgumentError):
        expand_node(node, AmavControl(0, 0), [], FOV, MNOISE, ONOISE)


@pytest.mark.parametrize(
    "candidate, reserved, epsilon, expected",
    [
        (np.eye(2), [np.eye(2)], 0.0, True),
        (0.5 * np.eye(2), [np.eye(2)], 0.1, False),
        (2.0 * np.eye(2), [np.eye(2)], 0.0, True),
        (0.5 * np.eye(2), [np.eye(2)], 0.5, True),
        (np.eye(2), [], 1.0, False),
    ],
)
def test_is_eps_redundant_examples(candidate, reserved, epsilon, expected):
    assert is_eps_redundant(candidate, reserved, epsilon) is expected


def test_is_eps_redundant_per_block():
    candidate = [np.eye(2), 0.1 * np.eye(2)]
    reserved = [[np.eye(2), np.eye(2)]]
    assert not is_eps_redundant(candidate, reserved, 0.0)
    assert is_eps_redundant(candidate, reserved, 0.9)


def test_is_eps_redundant_rejects_asymmetric():
    with pytest.raises(InvalidArgumentError):
        is_eps_redundant(np.array([[1.0, 0.5], [0.0, 1.0]]), [np.eye(2)], 0.0)


@pytest.mark.parametrize(
    "b, sigma, expected",
    [
        (Vec2(5, 0), 10.0, True),
        (Vec2(15, 0), 10.0, False),
        (Vec2(0, 0), 0.0, True),
        (Vec2(10, 0), 10.0, True),
    ],
)
def test_sigma_crosses(b, sigma, expected):
    assert sigma_crosses(Pose(Vec2(0, 0), 0.0), Pose(b, 1.0), sigma) is expected


def test_prune_level_keeps_minimum_and_drops_dominated_duplicates():
    pose = Pose(Vec2(2, 2), 0.0)
    best = SearchNode(pose, (Belief(Vec2(0, 0), 0.1 * np.eye(2)),), 1, (AmavControl(0, 0),), 0.2)
    worse = SearchNode(pose, (Belief(Vec2(0, 0), 0.3 * np.eye(2)),), 1, (AmavControl(0, 1),), 0.6)
    far = SearchNode(Pose(Vec2(7, 7), 0.0), (Belief(Vec2(0, 0), 0.5 * np.eye(2)),), 1, (AmavControl(1, 0),), 1.0)

    kept = prune_level([worse, far, best], PruneParams(epsilon=0.0, sigma=1.0))
    assert kept[0] is best
    assert worse not in kept
    assert far in kept


def test_prune_level_zero_sigma_needs_identical_heading():
    a = SearchNode(Pose(Vec2(2, 2), 0.0), (Belief(Vec2(0, 0), 0.1 * np.eye(2)),), 1, (), 0.2)
    b = SearchNode(Pose(Vec2(2, 2), 1.0), (Belief(Vec2(0, 0), 0.3 * np.eye(2)),), 1, (), 0.6)
    assert len(prune_level([a, b], PruneParams(epsilon=0.0, sigma=0.0))) == 2


def test_plan_empty_group_hovers():
    p = plan(Pose(Vec2(1, 1), 0.0), [], [], 4, ControlSetParams(), PruneParams(), FOV, MNOISE, ONOISE)
    assert p.controls == (AmavControl(0, 0),) * 4


def test_plan_returns_delta_known_controls():
    rng = np.random.default_rng(30)
    group, commands = _random_group(rng, Vec2(4, 4), 3)
    controls = ControlSetParams()
    p = plan(Pose(Vec2(4, 4), 0.5), group, commands, 5, controls, PruneParams(), FOV, MNOISE, ONOISE, Arena())
    assert len(p.controls) == 5
    assert set(p.controls) <= set(enumerate_controls(controls))
    assert len(p.reserved_per_level) == 5
    assert all(1 <= n <= 15 ** (t + 1) for t, n in enumerate(p.reserved_per_level))


def test_plan_moves_toward_unobserved_bmav():
    belief = Belief(Vec2(2.0, 0.5), np.eye(2) * 0.5)
    p = plan(
        Pose(Vec2(0.5, 0.5), 0.0), [belief], [BmavCommand(0, 0)], 2,
        ControlSetParams((0.0, 1.0), (0.0, 1.0, -1.0)), PruneParams(), FOV, MNOISE, ONOISE,
    )
    assert p.controls[0] == AmavControl(1.0, 0.0)


def test_pruned_plan_equals_exhaustive_with_zero_thresholds():
    rng = np.random.default_rng(31)
    exact = PruneParams(epsilon=0.0, sigma=0.0)
    for _ in range(10):
        start = Pose(Vec2(*rng.uniform(2.5, 5.5, size=2)), float(rng.uniform(-math.pi, math.pi)))
        group, commands = _random_group(rng, start.position, 2)
        args = (start, group, commands, 2, SIX_CONTROLS)
        pruned = plan(*args, exact, FOV, MNOISE, ONOISE, Arena())
        full = plan_exhaustive(*args, FOV, MNOISE, ONOISE, Arena())
        assert full.reserved_per_level == (6, 36)
        assert pruned.predicted_terminal_score == pytest.approx(full.predicted_terminal_score, abs=1e-9)


def test_default_pruning_never_beats_exhaustive():
    rng = np.random.default_rng(32)
    for _ in range(3):
        start = Pose(Vec2(*rng.uniform(3, 5, size=2)), float(rng.uniform(-math.pi, math.pi)))
        group, commands = _random_group(rng, start.position, 2)
        args = (start, group, commands, 3, ControlSetParams())
        pruned = plan(*args, PruneParams(), FOV, MNOISE, ONOISE, Arena())
        full = plan_exhaustive(*args, FOV, MNOISE, ONOISE, Arena())
        assert pruned.predicted_terminal_score >= full.predicted_terminal_score - 1e-12
        assert all(n <= m for n, m in zip(pruned.reserved_per_level, full.reserved_per_level))


def test_reserved_counts_and_time_shrink_with_epsilon():
    rng = np.random.default_rng(33)
    epsilons = (0.0, 0.5, 1.0, 2.0)
    seconds = dict.fromkeys(epsilons, 0.0)
    for _ in range(20):
        start = Pose(Vec2(*rng.uniform(3, 5, size=2)), float(rng.uniform(-math.pi, math.pi)))
        group, commands = _random_group(rng, start.position, 3)
        runs = []
        for eps in epsilons:
            timings = []
            for _ in range(3):
                began = time.perf_counter()
                result = plan(start, group, commands, 3, SIX_CONTROLS, PruneParams(epsilon=eps, sigma=10.0),
                              FOV, MNOISE, ONOISE, Arena())
                timings.append(time.perf_counter() - began)
            seconds[eps] += statistics.median(timings)
            runs.append(result)
        for level in range(3):
            counts = [r.reserved_per_level[level] for r in runs]
            assert counts == sorted(counts, reverse=True)
        expanded = [r.nodes_expanded for r in runs]
        assert expanded == sorted(expanded, reverse=True)
    assert seconds[2.0] <= seconds[0.0]


def test_logdet_indicator_plans():
    rng = np.random.default_rng(34)
    group, commands = _random_group(rng, Vec2(4, 4), 2)
    p = plan(Pose(Vec2(4, 4), 0.0), group, commands, 3, SIX_CONTROLS, PruneParams(),
             FOV, MNOISE, ONOISE, Arena(), indicator="logdet")
    assert len(p.controls) == 3
    with pytest.raises(InvalidArgumentError):
        plan(Pose(Vec2(4, 4), 0.0), group, commands, 3, SIX_CONTROLS, PruneParams(),
             FOV, MNOISE, ONOISE, Arena(), indicator="entropy")


def test_plan_stays_in_arena():
    belief = Belief(Vec2(7.5, 7.5), np.eye(2) * 0.3)
    p = plan(Pose(Vec2(7.8, 7.8), math.pi / 4), [belief], [BmavCommand(0, 0)], 3,
             ControlSetParams(), PruneParams(), FOV, MNOISE, ONOISE, Arena())
    pose = Pose(Vec2(7.8, 7.8), math.pi / 4)
    for c in p.controls:
        pose = amav_step(pose, c, 1.0)
        assert Arena().contains(pose.position)


def test_default_planner_runtime():
    rng = np.random.default_rng(35)
    group, commands = _random_group(rng, Vec2(4, 4), 3, cov_scale=0.3)
    timings = []
    for _ in range(5):
        started = time.perf_counter()
        plan(Pose(Vec2(4, 4), 0.0), group, commands, 5, ControlSetParams(), PruneParams(),
             FOV, MNOISE, ONOISE, Arena())
        timings.append((time.perf_counter() - started) * 1000.0)
    assert statistics.median(timings) <= 500.0
