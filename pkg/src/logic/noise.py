"""
Seeded random streams and the empirical noise models.

Every entity draws from its own stream, derived from the master seed, the
entity id and a purpose tag, so adding agents never perturbs the noise seen
by the others.
"""
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple

import numpy as np

from src.logic.errors import InvalidArgumentError
from src.logic.geometry import BmavCommand

_UINT64_MASK = (1 << 64) - 1


class StreamTag(IntEnum):
    """Purpose of a random stream."""

    MOTION = 0
    OBSERVATION = 1
    PLANNER = 2
    MISSION = 3


@dataclass(frozen=True, slots=True)
class MotionNoiseParams:
    """BMAV velocity noise: std = max(sigma_frac * |v_k|, sigma_floor) per axis."""

    sigma_frac: float = 0.20
    sigma_floor: float = 0.01

    def __post_init__(self):
        if self.sigma_frac < 0 or self.sigma_floor < 0:
            raise InvalidArgumentError("motion noise parameters must be non-negative")

    def sigmas(self, v: BmavCommand) -> Tuple[float, float]:
        return (
            max(self.sigma_frac * abs(v.vx), self.sigma_floor),
            max(self.sigma_frac * abs(v.vy), self.sigma_floor),
        )


@dataclass(frozen=True, slots=True)
class ObservationNoiseParams:
    """Range std = range_frac * r; bearing std = max(bearing_frac * |alpha|, bearing_floor)."""

    range_frac: float = 0.10
    bearing_frac: float = 0.05
    bearing_floor: float = 0.01

    def __post_init__(self):
        if min(self.range_frac, self.bearing_frac, self.bearing_floor) < 0:
            raise InvalidArgumentError("observation noise parameters must be non-negative")

    def sigmas(self, r: float, alpha: float) -> Tuple[float, float]:
        return self.range_frac * r, max(self.bearing_frac * abs(alpha), self.bearing_floor)


class RngStream:
    """
    Deterministic normal/uniform sampler owned by a single consumer.

    Wraps a PCG64 generator seeded from (master_seed, entity_id, stream_tag).
    """

    __slots__ = ("key", "_gen")

    def __init__(self, master_seed: int, entity_id: int, stream_tag: int):
        self.key = (int(master_seed), int(entity_id), int(stream_tag))
        entropy = [k & _UINT64_MASK for k in self.key]
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def normal(self, std: float) -> float:
        if std == 0.0:
            return 0.0
        return float(self._gen.normal(0.0, std))

    def uniform(self, low: float, high: float) -> float:
        return float(self._gen.uniform(low, high))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.key[0]}, entity={self.key[1]}, tag={self.key[2]})"


def derive_stream(master_seed: int, entity_id: int, stream_tag: int) -> RngStream:
    """
    Build the random stream for one entity and purpose.

    Args:
        master_seed: Run-level seed (any 64-bit integer)
        entity_id: BMAV or AMAV index
        stream_tag: Purpose tag, see StreamTag

    Returns:
        A fresh stream; identical triples replay identical draws
    """
    return RngStream(master_seed, entity_id, stream_tag)


def sample_motion_noise(
    v: BmavCommand, params: MotionNoiseParams, rng: RngStream
) -> Tuple[float, float]:
    """Draw one velocity-noise sample (m/s, m/s) for a commanded velocity."""
    sx, sy = params.sigmas(v)
    return rng.normal(sx), rng.normal(sy)


def sample_observation_noise(
    r: float, alpha: float, params: ObservationNoiseParams, rng: RngStream
) -> Tuple[float, float]:
    """
    Draw range and bearing noise for a measurement at range r and bearing alpha.

    Args:
        r: True range in meters, must be positive
        alpha: True bearing in radians
        params: Observation noise model
        rng: Stream owned by the observing AMAV

    Returns:
        (range noise in meters, bearing noise in radians)
    """
    if not (math.isfinite(r) and r > 0.0):
        raise InvalidArgumentError(f"range must be positive, got {r}")
    sr, sa = params.sigmas(r, alpha)
    return rng.normal(sr), rng.normal(sa)
