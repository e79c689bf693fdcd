"""
Gaussian location beliefs for BMAVs: motion-model prediction, linearized
range-bearing correction and the scalar uncertainty indicators.
"""
import math
from dataclasses import dataclass

import numpy as np

from src.logic.errors import (
    DegenerateGeometryError,
    InvalidArgumentError,
    NumericalDegeneracyError,
)
from src.logic.geometry import BmavCommand, Pose, Vec2, normalize_angle
from src.logic.noise import MotionNoiseParams, ObservationNoiseParams

R_MIN_JACOBIAN = 1e-3
MAX_CONDITION = 1e12
LOGDET_JITTER = 1e-9

_I2 = np.eye(2)


def _frozen(matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=float, copy=True).reshape(2, 2)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False, slots=True)
class Belief:
    """Location estimate of one BMAV: mean (m) and 2x2 covariance (m^2)."""

    mean: Vec2
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cov", _frozen(self.cov))

    @classmethod
    def certain(cls, mean: Vec2) -> "Belief":
        """Belief with zero covariance, used for take-off initialization."""
        return cls(mean, np.zeros((2, 2)))

    def with_cov(self, cov: np.ndarray) -> "Belief":
        return Belief(self.mean, cov)


@dataclass(frozen=True, slots=True)
class Observation:
    """Range (m) and bearing relative to the sensor heading (rad)."""

    range: float
    bearing: float


def observe_ideal(p: Pose, y: Vec2) -> Observation:
    """
    Noise-free range and bearing of a point seen from a pose.

    Args:
        p: Sensor pose
        y: Observed point

    Returns:
        Observation with range > 0 and bearing in (-pi, pi]
    """
    dx = y.x - p.position.x
    dy = y.y - p.position.y
    r = math.hypot(dx, dy)
    if r == 0.0:
        raise InvalidArgumentError("range is undefined for coincident sensor and target")
    return Observation(r, normalize_angle(math.atan2(dy, dx) - p.heading))


def observation_jacobian(p: Pose, y_mean: Vec2, r_min: float = R_MIN_JACOBIAN) -> np.ndarray:
    """
    Jacobian of (range, bearing) with respect to the target position.

    Args:
        p: Sensor pose
        y_mean: Linearization point
        r_min: Smallest range that is still linearized

    Returns:
        2x2 matrix [[dx/r, dy/r], [-sin(theta)/r, cos(theta)/r]], theta the absolute angle
    """
    dx = y_mean.x - p.position.x
    dy = y_mean.y - p.position.y
    r = math.hypot(dx, dy)
    if r < r_min:
        raise DegenerateGeometryError(f"target {r:.3g} m from sensor, below {r_min} m")
    # sin/cos of the absolute angle are dy/r and dx/r
    return np.array([[dx / r, dy / r], [-dy / (r * r), dx / (r * r)]])


def measurement_covariance(z: Observation, params: ObservationNoiseParams) -> np.ndarray:
    sr, sa = params.sigmas(z.range, z.bearing)
    return np.diag([sr * sr, sa * sa])


def process_noise(v_meas: BmavCommand, dt: float, params: MotionNoiseParams) -> np.ndarray:
    """Q = dt^2 * diag(sigma_x^2, sigma_y^2) for the measured velocity."""
    sx, sy = params.sigmas(v_meas)
    return (dt * dt) * np.diag([sx * sx, sy * sy])


def predict(b: Belief, v_meas: BmavCommand, dt: float, params: MotionNoiseParams) -> Belief:
    """
    Propagate a belief through the velocity-integration model.

    Args:
        b: Belief at the start of the step
        v_meas: Velocity the BMAV believes it flew
        dt: Step length in seconds
        params: Motion noise model used for Q

    Returns:
        Prior belief at the end of the step
    """
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    mean = Vec2(b.mean.x + dt * v_meas.vx, b.mean.y + dt * v_meas.vy)
    return Belief(mean, b.cov + process_noise(v_meas, dt, params))


def _gain(cov: np.ndarray, H: np.ndarray, R: np.ndarray) -> np.ndarray:
    S = H @ cov @ H.T + R
    if not np.all(np.isfinite(S)) or np.linalg.cond(S) > MAX_CONDITION:
        raise NumericalDegeneracyError(f"innovation covariance is singular: {S.tolist()}")
    return cov @ H.T @ np.linalg.inv(S)


def _posterior_cov(cov: np.ndarray, K: np.ndarray, H: np.ndarray, R: np.ndarray) -> np.ndarray:
    # Joseph form, then symmetrized
    A = _I2 - K @ H
    post = A @ cov @ A.T + K @ R @ K.T
    return 0.5 * (post + post.T)


def correct(
    b_prior: Belief, z: Observation, p: Pose, params: ObservationNoiseParams
) -> Belief:
    """
    Fuse one range-bearing observation into a prior belief.

    Args:
        b_prior: Predicted belief
        z: Noisy observation taken from pose p
        p: Observing AMAV pose (treated as exact)
        params: Observation noise model, evaluated at the predicted observation

    Returns:
        Posterior belief
    """
    H = observation_jacobian(p, b_prior.mean)
    z_hat = observe_ideal(p, b_prior.mean)
    R = measurement_covariance(z_hat, params)
    K = _gain(b_prior.cov, H, R)
    innovation = np.array([z.range - z_hat.range, normalize_angle(z.bearing - z_hat.bearing)])
    shift = K @ innovation
    mean = Vec2(b_prior.mean.x + float(shift[0]), b_prior.mean.y + float(shift[1]))
    return Belief(mean, _posterior_cov(b_prior.cov, K, H, R))


def expected_correction(b_prior: Belief, p: Pose, params: ObservationNoiseParams) -> Belief:
    """
    Covariance-only update used during planning.

    The mean is kept: no measurement exists yet, so the innovation is taken as zero.
    """
    H = observation_jacobian(p, b_prior.mean)
    R = measurement_covariance(observe_ideal(p, b_prior.mean), params)
    K = _gain(b_prior.cov, H, R)
    return b_prior.with_cov(_posterior_cov(b_prior.cov, K, H, R))


def uncertainty(b: Belief) -> float:
    """Trace of the belief covariance (m^2)."""
    return float(b.cov[0, 0] + b.cov[1, 1])


def log_det_uncertainty(b: Belief) -> float:
    """log det(cov + jitter * I); the alternative indicator compared against the trace."""
    sign, logdet = np.linalg.slogdet(b.cov + LOGDET_JITTER * _I2)
    if sign <= 0:
        raise NumericalDegeneracyError(f"covariance is not positive definite: {b.cov.tolist()}")
    return float(logdet)


def min_eigenvalue(cov: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(cov)[0])
