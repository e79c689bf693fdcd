import numpy as np
import pytest

from src.logic.errors import InvalidArgumentError
from src.logic.geometry import Vec2
from src.logic.navigation import Destination, NavParams, potential_command, reached

PARAMS = NavParams()


@pytest.mark.parametrize(
    "mean, dest, expected",
    [
        (Vec2(3, 3), Vec2(3, 3), (0.0, 0.0)),
        (Vec2(0, 0), Vec2(10, 0), (0.5, 0.0)),
        (Vec2(0, 0), Vec2(0.4, 0), (0.2, 0.0)),
    ],
)
def test_potential_command_examples(mean, dest, expected):
    v = potential_command(mean, Destination(dest), [], PARAMS)
    assert v.vx == pytest.approx(expected[0])
    assert v.vy == pytest.approx(expected[1])


def test_command_never_exceeds_v_max_and_points_at_destination():
    rng = np.random.default_rng(40)
    obstacles = [(Vec2(4, 4), 0.5), (Vec2(2, 6), 0.3)]
    for _ in range(500):
        mean = Vec2(*rng.uniform(0, 8, size=2))
        dest = Destination(Vec2(*rng.uniform(0, 8, size=2)))
        v = potential_command(mean, dest, obstacles, PARAMS)
        assert v.speed() <= PARAMS.v_max + 1e-12

        free = potential_command(mean, dest, [], PARAMS)
        to_dest = dest.point - mean
        if to_dest.norm() > 1e-9:
            assert free.vx * to_dest.x + free.vy * to_dest.y > 0


def test_horizon_caps_the_attractive_gain():
    # held for 5 s, 0.2 * 1 m covers exactly the remaining distance
    v = potential_command(Vec2(0, 0), Destination(Vec2(1, 0)), [], PARAMS, horizon=5.0)
    assert v.vx == pytest.approx(0.2)
    assert v.vy == 0.0


def test_short_horizon_keeps_configured_gain():
    v = potential_command(Vec2(0, 0), Destination(Vec2(0.4, 0)), [], PARAMS, horizon=1.0)
    assert v.vx == pytest.approx(0.2)


def test_obstacle_pushes_away():
    dest = Destination(Vec2(4, 0))
    free = potential_command(Vec2(0, 0), dest, [], PARAMS)
    # obstacle just above the BMAV
    pushed = potential_command(Vec2(0, 0), dest, [(Vec2(0, 0.5), 0.2)], PARAMS)
    assert pushed.vy < free.vy
    assert pushed.speed() <= PARAMS.v_max + 1e-12


def test_distant_obstacle_has_no_effect():
    dest = Destination(Vec2(0.4, 0))
    assert potential_command(Vec2(0, 0), dest, [(Vec2(5, 5), 0.5)], PARAMS) == potential_command(
        Vec2(0, 0), dest, [], PARAMS
    )


def test_repulsion_is_off_near_the_destination():
    dest = Destination(Vec2(1.0, 1.0))
    mean = Vec2(1.2, 1.0)
    near_obstacle = [(Vec2(1.4, 1.0), 0.1)]
    assert potential_command(mean, dest, near_obstacle, PARAMS) == potential_command(mean, dest, [], PARAMS)


def test_mean_on_obstacle_centre_is_pushed_along_x():
    v = potential_command(Vec2(2, 2), Destination(Vec2(6, 6)), [(Vec2(2, 2), 0.5)], PARAMS)
    assert (v.vx, v.vy) == (PARAMS.v_max, 0.0)


@pytest.mark.parametrize(
    "truth, expected",
    [
        (Vec2(1, 1), True),
        (Vec2(1.25, 1), True),
        (Vec2(1.26, 1), False),
    ],
)
def test_reached_boundary_is_inclusive(truth, expected):
    assert reached(truth, Destination(Vec2(1, 1), accuracy=0.25)) is expected


def test_reached_is_monotone_in_accuracy():
    truth = Vec2(2.0, 2.3)
    dest = Vec2(2.0, 2.0)
    hits = [reached(truth, Destination(dest, acc)) for acc in (0.1, 0.2, 0.3, 0.4, 0.8)]
    assert hits == sorted(hits)


def test_invalid_parameters():
    with pytest.raises(InvalidArgumentError):
        NavParams(v_max=0.0)
    with pytest.raises(InvalidArgumentError):
        Destination(Vec2(0, 0), accuracy=-1.0)
