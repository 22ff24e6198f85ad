"""Per-segment speeds, peak speed, and at-marker speed from a trajectory.

Speeds are chord distances between measurement points, scaled by the
calibration factor and frame time. The measurement point is either the box
center or a motion-compensated point on the leading edge, which is more
robust when motion blur elongates the detected box.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .calibration import NetMarker, TravelSide, VideoMeta, kmh_per_pixel_step
from .errors import CalibrationMissingError, InputContractError, InsufficientDataError
from .geometry import PixelPoint
from .tracker import PointSource, TrackPoint, Trajectory

_ZERO_VELOCITY_EPS = 1e-6  # pixels/frame; below this, fall back to the center


class MeasurementPointMode(enum.Enum):
    CENTER = "center"
    LEADING_EDGE = "leading_edge"


@dataclass(frozen=True)
class SpeedSample:
    from_frame: int
    to_frame: int
    speed_kmh: float
    from_point: PixelPoint
    to_point: PixelPoint

    def __post_init__(self):
        if self.to_frame <= self.from_frame:
            raise InputContractError("to_frame must exceed from_frame")
        if self.speed_kmh < 0:
            raise InputContractError("speed_kmh must be >= 0")


@dataclass(frozen=True)
class SpeedReport:
    samples: list[SpeedSample]
    peak: SpeedSample
    measurement_point_mode: MeasurementPointMode
    at_marker: Optional[SpeedSample] = None


def leading_edge_point(point: TrackPoint, velocity_direction: tuple[float, float]) -> PixelPoint:
    """Foremost box point along the direction of motion.

    Intersects the ray from the box center along the velocity direction
    with the box boundary. Falls back to the raw position when the point
    has no box, and to the center when the velocity is effectively zero.
    """
    if point.box is None:
        return point.position
    dx, dy = velocity_direction
    norm = math.hypot(dx, dy)
    center = point.box.center()
    if norm < _ZERO_VELOCITY_EPS:
        return center
    ux, uy = dx / norm, dy / norm
    half_w = point.box.width / 2.0
    half_h = point.box.height / 2.0
    # Ray-AABB exit distance from the center: first boundary hit wins.
    t = math.inf
    if ux != 0.0:
        t = min(t, half_w / abs(ux))
    if uy != 0.0:
        t = min(t, half_h / abs(uy))
    return PixelPoint(center.x + t * ux, center.y + t * uy)


def segment_speed(
    p_i: PixelPoint,
    p_j: PixelPoint,
    frames_elapsed: int,
    cal,
    meta: VideoMeta,
) -> float:
    """Speed in km/h of the straight segment between two measurement points."""
    if frames_elapsed < 1:
        raise InputContractError(f"frames_elapsed must be >= 1, got {frames_elapsed}")
    return p_i.distance_to(p_j) * kmh_per_pixel_step(cal, meta) / frames_elapsed


def _chord_direction(prev: Optional[TrackPoint], point: TrackPoint, nxt: Optional[TrackPoint]) -> tuple[float, float]:
    a = prev.position if prev is not None else point.position
    b = nxt.position if nxt is not None else point.position
    return (b.x - a.x, b.y - a.y)


def _measurement_point(
    point: TrackPoint,
    mode: MeasurementPointMode,
    prev: Optional[TrackPoint],
    nxt: Optional[TrackPoint],
) -> PixelPoint:
    if mode is MeasurementPointMode.CENTER or point.box is None:
        return point.position
    direction = point.velocity
    if direction is None or math.hypot(*direction) < _ZERO_VELOCITY_EPS:
        direction = _chord_direction(prev, point, nxt)
    return leading_edge_point(point, direction)


def _crosses_marker(sample: SpeedSample, marker: NetMarker) -> bool:
    if marker.side is TravelSide.LEFT_TO_RIGHT:
        return sample.from_point.x <= marker.marker_x <= sample.to_point.x
    return sample.from_point.x >= marker.marker_x >= sample.to_point.x


def speed_report(
    traj: Trajectory,
    marker: Optional[NetMarker] = None,
    mode: MeasurementPointMode = MeasurementPointMode.LEADING_EDGE,
    include_coasted: bool = False,
) -> SpeedReport:
    """Per-segment speeds over the usable points of a trajectory.

    Coasted points are model output rather than measurement, so they are
    excluded unless include_coasted is set. Segment gaps use the actual
    frame-index difference, so dropouts average rather than inflate speeds.
    """
    if traj.calibration is None:
        raise CalibrationMissingError("speed reporting requires a scale calibration")
    usable = [
        p
        for p in traj.points
        if include_coasted or p.source is not PointSource.COASTED
    ]
    if len(usable) < 2:
        raise InsufficientDataError(
            f"need at least 2 usable trajectory points, have {len(usable)}"
        )

    measured: list[PixelPoint] = []
    for i, p in enumerate(usable):
        prev = usable[i - 1] if i > 0 else None
        nxt = usable[i + 1] if i + 1 < len(usable) else None
        measured.append(_measurement_point(p, mode, prev, nxt))

    samples: list[SpeedSample] = []
    for (a, pa), (b, pb) in zip(zip(usable, measured), zip(usable[1:], measured[1:])):
        elapsed = b.frame_index - a.frame_index
        samples.append(
            SpeedSample(
                from_frame=a.frame_index,
                to_frame=b.frame_index,
                speed_kmh=segment_speed(pa, pb, elapsed, traj.calibration, traj.meta),
                from_point=pa,
                to_point=pb,
            )
        )

    peak = max(samples, key=lambda s: s.speed_kmh)
    at_marker = None
    if marker is not None:
        for sample in samples:
            if _crosses_marker(sample, marker):
                at_marker = sample
                break
    return SpeedReport(samples=samples, peak=peak, measurement_point_mode=mode, at_marker=at_marker)
