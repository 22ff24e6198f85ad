"""Constant-velocity linear Kalman filter over pixel coordinates.

State is [x, y, vx, vy] with dt fixed at one frame, so the filter is
agnostic to resolution and frame rate; physical units enter only downstream
via the scale factor and frame time. Operations are pure: state in,
state out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputContractError
from .geometry import PixelPoint

# State transition for dt = 1 frame: position += velocity.
_F = np.array(
    [
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)

# Observation of (x, y) only.
_H = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
)

# Discrete white-noise-acceleration process noise for dt = 1, per-axis
# blocks [[1/4, 1/2], [1/2, 1]] laid out over the [x, y, vx, vy] ordering.
_Q_UNIT = np.array(
    [
        [0.25, 0.0, 0.5, 0.0],
        [0.0, 0.25, 0.0, 0.5],
        [0.5, 0.0, 1.0, 0.0],
        [0.0, 0.5, 0.0, 1.0],
    ]
)


@dataclass(frozen=True)
class KalmanConfig:
    """Noise parameters; defaults are artifact choices, exposed in config."""

    process_noise_scale: float = 10.0
    measurement_noise: float = 25.0
    initial_position_variance: float = 25.0
    initial_velocity_variance: float = 1e4

    def __post_init__(self):
        for name in (
            "process_noise_scale",
            "measurement_noise",
            "initial_position_variance",
            "initial_velocity_variance",
        ):
            if getattr(self, name) <= 0:
                raise InputContractError(f"{name} must be strictly positive")


@dataclass(frozen=True, eq=False)
class KalmanState:
    """Filter state: position, velocity (pixels/frame), 4x4 covariance."""

    position: PixelPoint
    velocity: tuple[float, float]
    covariance: np.ndarray

    def mean(self) -> np.ndarray:
        return np.array([self.position.x, self.position.y, self.velocity[0], self.velocity[1]])


def _make_state(mean: np.ndarray, cov: np.ndarray) -> KalmanState:
    cov = (cov + cov.T) / 2.0  # keep symmetric against float drift
    return KalmanState(
        position=PixelPoint(float(mean[0]), float(mean[1])),
        velocity=(float(mean[2]), float(mean[3])),
        covariance=cov,
    )


def kalman_init(first_measurement: PixelPoint, config: KalmanConfig) -> KalmanState:
    """Start a track at a measurement with zero, highly uncertain velocity."""
    mean = np.array([first_measurement.x, first_measurement.y, 0.0, 0.0])
    cov = np.diag(
        [
            config.initial_position_variance,
            config.initial_position_variance,
            config.initial_velocity_variance,
            config.initial_velocity_variance,
        ]
    )
    return _make_state(mean, cov)


def kalman_predict(state: KalmanState, config: KalmanConfig) -> KalmanState:
    """Advance one frame under the constant-velocity model."""
    mean = _F @ state.mean()
    cov = _F @ state.covariance @ _F.T + config.process_noise_scale * _Q_UNIT
    return _make_state(mean, cov)


def kalman_update(state: KalmanState, measurement: PixelPoint, config: KalmanConfig) -> KalmanState:
    """Fold a position measurement into a predicted state.

    Uses the Joseph-form covariance update, which preserves symmetry and
    positive semi-definiteness under float arithmetic.
    """
    if not (math.isfinite(measurement.x) and math.isfinite(measurement.y)):
        raise InputContractError("measurement must be finite")
    z = np.array([measurement.x, measurement.y])
    mean = state.mean()
    cov = state.covariance
    r = config.measurement_noise * np.eye(2)

    innovation = z - _H @ mean
    s = _H @ cov @ _H.T + r
    gain = cov @ _H.T @ np.linalg.inv(s)

    new_mean = mean + gain @ innovation
    ikh = np.eye(4) - gain @ _H
    new_cov = ikh @ cov @ ikh.T + gain @ r @ gain.T
    return _make_state(new_mean, new_cov)
