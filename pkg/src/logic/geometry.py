"""
Planar geometry and kinematics for the swarm simulator.

Holds the value types shared by every other module (Vec2, Pose, controls,
FoV and arena parameters), the AMAV unicycle model, the BMAV noisy
velocity-integration model and the sector field-of-view test.
"""
import math
from dataclasses import dataclass
from typing import Tuple

from src.logic.errors import InvalidArgumentError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, slots=True)
class Vec2:
    """2-D point or displacement in meters (or m/s for velocities)."""

    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def scale(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def distance_to(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


@dataclass(frozen=True, slots=True)
class Pose:
    """AMAV configuration: position plus heading in (-pi, pi]."""

    position: Vec2
    heading: float


@dataclass(frozen=True, slots=True)
class AmavControl:
    """Unicycle motion primitive: forward speed u (m/s) and turn rate omega (rad/s)."""

    u: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.omega)):
            raise InvalidArgumentError(f"AMAV control must be finite, got ({self.u}, {self.omega})")
        if self.u < 0:
            raise InvalidArgumentError(f"AMAV speed must be non-negative, got {self.u}")


@dataclass(frozen=True, slots=True)
class BmavCommand:
    """Commanded BMAV velocity in m/s."""

    vx: float
    vy: float

    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    def as_vec(self) -> Vec2:
        return Vec2(self.vx, self.vy)


HOVER = BmavCommand(0.0, 0.0)


@dataclass(frozen=True, slots=True)
class FovParams:
    """Sector sensor: full aperture angle (rad) and maximum range r_max (m)."""

    angle: float = math.radians(120.0)
    r_max: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.angle <= TWO_PI):
            raise InvalidArgumentError(f"FoV angle must be in (0, 2pi], got {self.angle}")
        if not self.r_max > 0.0:
            raise InvalidArgumentError(f"FoV r_max must be positive, got {self.r_max}")


@dataclass(frozen=True, slots=True)
class Arena:
    """Axis-aligned rectangle [0, length] x [0, width]."""

    length: float = 8.0
    width: float = 8.0

    def __post_init__(self):
        if not (self.length > 0.0 and self.width > 0.0):
            raise InvalidArgumentError(f"arena dimensions must be positive, got {self.length}x{self.width}")

    def contains(self, q: Vec2) -> bool:
        return 0.0 <= q.x <= self.length and 0.0 <= q.y <= self.width

    def clamp(self, q: Vec2) -> Vec2:
        return Vec2(min(max(q.x, 0.0), self.length), min(max(q.y, 0.0), self.width))

    @property
    def center(self) -> Vec2:
        return Vec2(self.length / 2.0, self.width / 2.0)


def normalize_angle(a: float) -> float:
    """
    Wrap an angle into (-pi, pi].

    Args:
        a: Angle in radians

    Returns:
        Equivalent angle modulo 2*pi in the half-open interval (-pi, pi]
    """
    if not math.isfinite(a):
        raise InvalidArgumentError(f"cannot normalize non-finite angle {a}")
    if -math.pi < a <= math.pi:
        return a
    wrapped = math.fmod(a + math.pi, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    wrapped -= math.pi
    # -pi belongs to the closed end
    if wrapped <= -math.pi:
        return math.pi
    return wrapped


def amav_step(p: Pose, c: AmavControl, dt: float) -> Pose:
    """
    Advance an AMAV one step of the unicycle model.

    The position moves along the pre-step heading; the heading is rotated afterwards.

    Args:
        p: Current pose
        c: Control held for the whole step
        dt: Step length in seconds

    Returns:
        Pose after dt seconds
    """
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    travel = dt * c.u
    position = Vec2(
        p.position.x + travel * math.cos(p.heading),
        p.position.y + travel * math.sin(p.heading),
    )
    if not position.is_finite():
        raise InvalidArgumentError(f"AMAV step produced a non-finite position from {p}")
    return Pose(position, normalize_angle(p.heading + dt * c.omega))


def bmav_step(
    y: Vec2,
    v: BmavCommand,
    n: Tuple[float, float],
    dt: float,
    arena: Arena = Arena(),
) -> Vec2:
    """
    Integrate a BMAV truth position over one step with additive velocity noise.

    Args:
        y: Current true position
        v: Commanded velocity
        n: Velocity noise sample (m/s, m/s)
        dt: Step length in seconds
        arena: Bounds the result is clamped into

    Returns:
        New true position inside the arena
    """
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    moved = Vec2(y.x + dt * (v.vx + n[0]), y.y + dt * (v.vy + n[1]))
    return arena.clamp(moved)


def bearing_to(p: Pose, q: Vec2) -> float:
    """Bearing of q relative to the pose heading, in (-pi, pi]."""
    return normalize_angle(math.atan2(q.y - p.position.y, q.x - p.position.x) - p.heading)


def in_fov(p: Pose, q: Vec2, f: FovParams) -> bool:
    """
    Test whether a point lies in the open sector sensed from a pose.

    Args:
        p: Sensor pose
        q: Point to test
        f: Sector aperture and range

    Returns:
        True iff 0 < range < r_max and |bearing| < angle / 2
    """
    dist = p.position.distance_to(q)
    if not (0.0 < dist < f.r_max):
        return False
    return abs(bearing_to(p, q)) < f.angle / 2.0
