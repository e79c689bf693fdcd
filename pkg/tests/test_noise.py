import math

import numpy as np
import pytest

from src.logic.errors import InvalidArgumentError
from src.logic.geometry import BmavCommand
from src.logic.noise import (
    MotionNoiseParams,
    ObservationNoiseParams,
    StreamTag,
    derive_stream,
    sample_motion_noise,
    sample_observation_noise,
)

N_DRAWS = 100_000


def _draws(fn, n=N_DRAWS):
    return np.array([fn() for _ in range(n)])


def test_streams_replay_identically():
    a = derive_stream(42, 0, StreamTag.MOTION)
    b = derive_stream(42, 0, StreamTag.MOTION)
    assert [a.normal(1.0) for _ in range(10)] == [b.normal(1.0) for _ in range(10)]


@pytest.mark.parametrize("other", [(42, 1, 0), (43, 0, 0), (42, 0, 1)])
def test_streams_differ_by_seed_entity_and_tag(other):
    assert derive_stream(42, 0, 0).normal(1.0) != derive_stream(*other).normal(1.0)


def test_large_and_negative_seeds_are_accepted():
    assert math.isfinite(derive_stream(2**70, -1, StreamTag.MISSION).uniform(0.0, 1.0))


def test_zero_noise_models_draw_zero():
    rng = derive_stream(1, 0, StreamTag.MOTION)
    params = MotionNoiseParams(sigma_frac=0.0, sigma_floor=0.0)
    for _ in range(100):
        assert sample_motion_noise(BmavCommand(0.5, -0.3), params, rng) == (0.0, 0.0)

    obs = ObservationNoiseParams(range_frac=0.0, bearing_frac=0.0, bearing_floor=0.0)
    for _ in range(100):
        assert sample_observation_noise(1.0, 0.3, obs, rng) == (0.0, 0.0)


def test_motion_noise_std_scales_with_speed():
    rng = derive_stream(7, 0, StreamTag.MOTION)
    samples = _draws(lambda: sample_motion_noise(BmavCommand(0.5, 0.0), MotionNoiseParams(), rng))
    assert samples[:, 0].std() == pytest.approx(0.1, rel=0.05)
    assert samples[:, 1].std() == pytest.approx(0.01, rel=0.05)


def test_motion_noise_floor_at_rest():
    rng = derive_stream(8, 0, StreamTag.MOTION)
    samples = _draws(lambda: sample_motion_noise(BmavCommand(0.0, 0.0), MotionNoiseParams(), rng))
    assert samples.std(axis=0) == pytest.approx([0.01, 0.01], rel=0.05)


def test_observation_noise_std():
    rng = derive_stream(9, 0, StreamTag.OBSERVATION)
    params = ObservationNoiseParams()
    samples = _draws(lambda: sample_observation_noise(1.0, 0.0, params, rng))
    assert samples[:, 0].std() == pytest.approx(0.1, rel=0.05)
    assert samples[:, 1].std() == pytest.approx(params.bearing_floor, rel=0.05)


def test_noise_is_zero_mean():
    rng = derive_stream(10, 3, StreamTag.OBSERVATION)
    params = ObservationNoiseParams()
    samples = _draws(lambda: sample_observation_noise(2.0, 1.0, params, rng))
    sr, sa = params.sigmas(2.0, 1.0)
    bound = 4.0 / math.sqrt(N_DRAWS)
    assert abs(samples[:, 0].mean()) < bound * sr
    assert abs(samples[:, 1].mean()) < bound * sa


def test_observation_noise_rejects_non_positive_range():
    rng = derive_stream(1, 0, StreamTag.OBSERVATION)
    with pytest.raises(InvalidArgumentError):
        sample_observation_noise(0.0, 0.0, ObservationNoiseParams(), rng)


def test_negative_parameters_rejected():
    with pytest.raises(InvalidArgumentError):
        MotionNoiseParams(sigma_frac=-0.1)
    with pytest.raises(InvalidArgumentError):
        ObservationNoiseParams(bearing_floor=-1.0)
