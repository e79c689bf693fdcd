"""
BMAV navigation by artificial potential fields, plus the arrival test.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from src.logic.errors import InvalidArgumentError
from src.logic.geometry import BmavCommand, Vec2

logger = logging.getLogger(__name__)

Obstacle = Tuple[Vec2, float]


@dataclass(frozen=True)
class NavParams:
    """
    Potential-field gains and limits.

    obstacle_radius is the influence margin around an obstacle's surface;
    repulsion is switched off within arrival_radius of the destination.
    """

    v_max: float = 0.5
    attract_gain: float = 0.5
    repulse_gain: float = 0.1
    obstacle_radius: float = 0.5
    arrival_radius: float = 0.5

    def __post_init__(self):
        for name in ("v_max", "attract_gain", "repulse_gain", "obstacle_radius", "arrival_radius"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"navigation parameter {name} must be positive")


@dataclass(frozen=True)
class Destination:
    point: Vec2
    accuracy: float = 0.2

    def __post_init__(self):
        if not self.accuracy > 0:
            raise InvalidArgumentError(f"destination accuracy must be positive, got {self.accuracy}")


def _clamp(vx: float, vy: float, v_max: float) -> BmavCommand:
    speed = math.hypot(vx, vy)
    if speed > v_max:
        k = v_max / speed
        return BmavCommand(vx * k, vy * k)
    return BmavCommand(vx, vy)


def potential_command(
    mean: Vec2,
    dest: Destination,
    obstacles: Sequence[Obstacle],
    params: NavParams,
    horizon: Optional[float] = None,
) -> BmavCommand:
    """
    Velocity command from the attractive/repulsive field at the believed position.

    Attraction is proportional to the displacement, so the command shrinks
    by itself on the final approach. Each obstacle within its influence adds an
    inverse-square push away from its centre. When the command will be held
    for a horizon, the attractive speed is capped at distance / horizon so the
    BMAV cannot fly past the destination before the next command.

    Args:
        mean: Belief mean of the BMAV
        dest: Destination
        obstacles: Static discs as (centre, radius)
        params: Gains and speed limit
        horizon: Seconds the command is held, if known

    Returns:
        Command with magnitude at most v_max
    """
    gain = params.attract_gain
    if horizon is not None and horizon > 0:
        gain = min(gain, 1.0 / horizon)
    vx = gain * (dest.point.x - mean.x)
    vy = gain * (dest.point.y - mean.y)

    if mean.distance_to(dest.point) > params.arrival_radius:
        for centre, radius in obstacles:
            away = mean - centre
            dist = away.norm()
            if dist > radius + params.obstacle_radius:
                continue
            if dist == 0.0:
                logger.warning(f"BMAV belief sits on obstacle centre {centre}; pushing along +x")
                return BmavCommand(params.v_max, 0.0)
            k = params.repulse_gain / dist**3
            vx += k * away.x
            vy += k * away.y

    return _clamp(vx, vy, params.v_max)


def reached(truth: Vec2, dest: Destination) -> bool:
    """True iff the true position is within the destination accuracy (inclusive)."""
    return truth.distance_to(dest.point) <= dest.accuracy
