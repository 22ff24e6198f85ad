"""Pixel-to-meter scale calibration and the optional net marker line.

The scale factor comes from two operator-selected reference points with a
known real-world separation. The reference line must lie in the shuttle's
plane of motion (same camera distance as the point of impact); that is an
operator requirement, not something the software can check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DegenerateCalibrationError, InputContractError
from .geometry import PixelPoint


@dataclass(frozen=True)
class VideoMeta:
    """Frame geometry and timing for one clip."""

    frame_width: float
    frame_height: float
    fps: float

    def __post_init__(self):
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise InputContractError("frame dimensions must be positive")
        if self.fps <= 0:
            raise InputContractError(f"fps must be positive, got {self.fps}")

    @property
    def frame_time(self) -> float:
        """Seconds per frame."""
        return 1.0 / self.fps


@dataclass(frozen=True)
class ScaleCalibration:
    """Two reference points, their real separation, and the derived scale."""

    point_a: PixelPoint
    point_b: PixelPoint
    real_distance: float
    pixel_distance: float
    scale_factor: float


class TravelSide(enum.Enum):
    """Horizontal direction the smash travels across the frame."""

    LEFT_TO_RIGHT = "left_to_right"
    RIGHT_TO_LEFT = "right_to_left"


@dataclass(frozen=True)
class NetMarker:
    """Vertical pixel line at the net, where a radar gun would read."""

    marker_x: float
    side: TravelSide

    def __post_init__(self):
        if not math.isfinite(self.marker_x) or self.marker_x < 0:
            raise InputContractError(f"marker_x must be finite and >= 0, got {self.marker_x}")


def compute_scale(point_a: PixelPoint, point_b: PixelPoint, real_distance: float) -> ScaleCalibration:
    """Derive meters-per-pixel from two reference points and a known distance."""
    if real_distance <= 0:
        raise InputContractError(f"real_distance must be positive, got {real_distance}")
    pixel_distance = point_a.distance_to(point_b)
    if pixel_distance == 0.0:
        raise DegenerateCalibrationError("reference points coincide; pixel distance is zero")
    return ScaleCalibration(
        point_a=point_a,
        point_b=point_b,
        real_distance=real_distance,
        pixel_distance=pixel_distance,
        scale_factor=real_distance / pixel_distance,
    )


def kmh_per_pixel_step(cal: ScaleCalibration, meta: VideoMeta) -> float:
    """Speed in km/h implied by a displacement of one pixel in one frame."""
    return cal.scale_factor * meta.fps * 3.6
