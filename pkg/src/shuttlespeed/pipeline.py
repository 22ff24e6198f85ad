"""End-to-end glue: detection stream in, trajectory and speed report out.

The stages are deliberately separable — ingest/filtering, tracking, and
speed reporting can each be driven on their own — but `run_stream` chains
them the way the command-line tools and the session service do.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .config import PipelineConfig
from .errors import CalibrationMissingError
from .formats import DetectionStream, read_detection_stream
from .geometry import Detection, nms
from .kinematics import SpeedReport, speed_report
from .tracker import FrameDiagnostics, Trajectory, track, track_with_diagnostics


def filter_frames(
    frames: list[list[Detection]],
    min_confidence: float,
    nms_iou: float,
) -> list[list[Detection]]:
    """Confidence-gate (inclusive) then suppress overlaps, frame by frame."""
    filtered: list[list[Detection]] = []
    for frame in frames:
        kept = [d for d in frame if d.confidence >= min_confidence]
        filtered.append(nms(kept, nms_iou) if kept else [])
    return filtered


def ingest(text: str, config: PipelineConfig) -> DetectionStream:
    """Parse a detection stream and apply the ingest filters."""
    stream = read_detection_stream(text)
    frames = filter_frames(stream.frames, config.ingest.min_confidence, config.ingest.nms_iou)
    return DetectionStream(meta=stream.meta, frames=frames, source=stream.source)


def run_tracking(stream: DetectionStream, config: PipelineConfig) -> Trajectory:
    if config.calibration is None:
        raise CalibrationMissingError("tracking requires a scale calibration in the config")
    return track(
        stream.frames,
        config.calibration,
        stream.meta,
        config.kalman,
        config.tracker,
    )


@dataclass(frozen=True)
class TrackingRun:
    trajectory: Trajectory
    diagnostics: list[FrameDiagnostics]


def run_tracking_with_diagnostics(stream: DetectionStream, config: PipelineConfig) -> TrackingRun:
    if config.calibration is None:
        raise CalibrationMissingError("tracking requires a scale calibration in the config")
    trajectory, diagnostics = track_with_diagnostics(
        stream.frames,
        config.calibration,
        stream.meta,
        config.kalman,
        config.tracker,
    )
    return TrackingRun(trajectory=trajectory, diagnostics=diagnostics)


def report_for(trajectory: Trajectory, config: PipelineConfig) -> SpeedReport:
    return speed_report(
        trajectory,
        marker=config.net_marker,
        mode=config.measurement_point_mode,
        include_coasted=config.include_coasted,
    )


@dataclass(frozen=True)
class StreamResult:
    stream: DetectionStream
    trajectory: Trajectory
    report: SpeedReport
    diagnostics: Optional[list[FrameDiagnostics]] = None


def run_stream(text: str, config: PipelineConfig, keep_diagnostics: bool = False) -> StreamResult:
    """Detection-stream text -> filtered stream -> trajectory -> speed report."""
    stream = ingest(text, config)
    if keep_diagnostics:
        run = run_tracking_with_diagnostics(stream, config)
        trajectory, diagnostics = run.trajectory, run.diagnostics
    else:
        trajectory, diagnostics = run_tracking(stream, config), None
    report = report_for(trajectory, config)
    return StreamResult(stream=stream, trajectory=trajectory, report=report, diagnostics=diagnostics)
