"""Line-delimited structured-text file formats with versioned headers.

Every file is JSON-lines: the first line is a header object carrying
"format" and "version" plus file-level fields; each following line is one
record. Writers emit keys in the fixed orders documented in
docs/FORMATS.md and never emit extra whitespace, so a file written by this
module round-trips byte-for-byte through read -> write. Readers accept any
key order and report errors with 1-based line numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Optional

from .calibration import VideoMeta
from .errors import StreamParseError, StreamValidationError
from .geometry import BoundingBox, Detection, PixelPoint
from .kinematics import MeasurementPointMode, SpeedReport, SpeedSample
from .simulator import FrameSample, GroundTruthFlight
from .tracker import PointSource, TrackPoint

if TYPE_CHECKING:
    from .evalkit import ErrorSummary

DETSTREAM_FORMAT = "detstream"
TRUTH_FORMAT = "dettruth"
TRAJECTORY_FORMAT = "trajectory"
SPEEDREPORT_FORMAT = "speedreport"
ERRORSUMMARY_FORMAT = "errorsummary"
PAIREDSPEEDS_FORMAT = "pairedspeeds"
FLIGHT_FORMAT = "flightpath"
RADAR_COMPARISON_FORMAT = "radar_comparison"
FORMAT_VERSION = 1


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def dumps_jsonl(header: dict, records: Iterable[dict]) -> str:
    lines = [_dump_line(header)]
    lines.extend(_dump_line(r) for r in records)
    return "\n".join(lines) + "\n"


def _parse_lines(text: str, expected_format: str) -> tuple[dict, list[tuple[int, dict]]]:
    """Split a JSONL document into (header, [(line_number, record), ...])."""
    header: Optional[dict] = None
    records: list[tuple[int, dict]] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise StreamParseError(f"invalid JSON: {exc.msg}", line_number) from exc
        if not isinstance(obj, dict):
            raise StreamParseError("each line must be a JSON object", line_number)
        if header is None:
            header = obj
            if header.get("format") != expected_format:
                raise StreamParseError(
                    f"expected format {expected_format!r}, got {header.get('format')!r}",
                    line_number,
                )
            if header.get("version") != FORMAT_VERSION:
                raise StreamParseError(
                    f"unsupported {expected_format} version {header.get('version')!r}",
                    line_number,
                )
        else:
            records.append((line_number, obj))
    if header is None:
        raise StreamParseError(f"empty file: missing {expected_format} header")
    return header, records


def _require(record: dict, keys: Iterable[str], line_number: int) -> None:
    missing = [k for k in keys if k not in record]
    if missing:
        raise StreamParseError(f"missing fields {missing}", line_number)


def _finite_number(value: Any, name: str, line_number: int) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise StreamParseError(f"{name} must be a finite number, got {value!r}", line_number)
    return float(value)


# --------------------------------------------------------------------------
# Detection stream


def write_detection_stream(
    meta: VideoMeta,
    frames: list[list[Detection]],
    source: str = "",
) -> str:
    header = {
        "format": DETSTREAM_FORMAT,
        "version": FORMAT_VERSION,
        "width": meta.frame_width,
        "height": meta.frame_height,
        "fps": meta.fps,
        "frame_count": len(frames),
        "source": source,
    }
    records = []
    for frame in frames:
        for det in frame:
            records.append(
                {
                    "frame": det.frame_index,
                    "x1": det.box.x1,
                    "y1": det.box.y1,
                    "x2": det.box.x2,
                    "y2": det.box.y2,
                    "confidence": det.confidence,
                }
            )
    return dumps_jsonl(header, records)


@dataclass(frozen=True)
class DetectionStream:
    meta: VideoMeta
    frames: list[list[Detection]]  # index = frame number, len = frame_count
    source: str


def read_detection_stream(text: str) -> DetectionStream:
    header, records = _parse_lines(text, DETSTREAM_FORMAT)
    for key in ("width", "height", "fps", "frame_count"):
        if key not in header:
            raise StreamParseError(f"header missing {key!r}", 1)
    width = _finite_number(header["width"], "width", 1)
    height = _finite_number(header["height"], "height", 1)
    fps = _finite_number(header["fps"], "fps", 1)
    frame_count = header["frame_count"]
    if not isinstance(frame_count, int) or frame_count < 0:
        raise StreamParseError("frame_count must be a non-negative integer", 1)
    meta = VideoMeta(frame_width=width, frame_height=height, fps=fps)

    frames: list[list[Detection]] = [[] for _ in range(frame_count)]
    last_frame = -1
    for line_number, rec in records:
        _require(rec, ("frame", "x1", "y1", "x2", "y2", "confidence"), line_number)
        frame = rec["frame"]
        if not isinstance(frame, int) or frame < 0:
            raise StreamParseError("frame must be a non-negative integer", line_number)
        if frame < last_frame:
            raise StreamValidationError(
                f"records must be non-decreasing in frame, got {frame} after {last_frame}",
                line_number,
            )
        if frame >= frame_count:
            raise StreamValidationError(
                f"frame {frame} out of range for frame_count {frame_count}", line_number
            )
        last_frame = frame
        x1 = _finite_number(rec["x1"], "x1", line_number)
        y1 = _finite_number(rec["y1"], "y1", line_number)
        x2 = _finite_number(rec["x2"], "x2", line_number)
        y2 = _finite_number(rec["y2"], "y2", line_number)
        confidence = _finite_number(rec["confidence"], "confidence", line_number)
        if not (x1 < x2 and y1 < y2):
            raise StreamValidationError("box must have positive area", line_number)
        if x1 < 0 or y1 < 0 or x2 > width or y2 > height:
            raise StreamValidationError(
                f"box ({x1}, {y1}, {x2}, {y2}) exceeds frame bounds {width}x{height}",
                line_number,
            )
        if not (0.0 <= confidence <= 1.0):
            raise StreamValidationError(
                f"confidence must be in [0, 1], got {confidence}", line_number
            )
        frames[frame].append(Detection(frame, BoundingBox(x1, y1, x2, y2), confidence))
    return DetectionStream(meta=meta, frames=frames, source=str(header.get("source", "")))


# --------------------------------------------------------------------------
# Truth sidecar (detection ids are 0-based record ordinals in the stream)


def write_truth_sidecar(labels: list[str]) -> str:
    header = {"format": TRUTH_FORMAT, "version": FORMAT_VERSION, "count": len(labels)}
    records = [{"id": i, "label": label} for i, label in enumerate(labels)]
    return dumps_jsonl(header, records)


def read_truth_sidecar(text: str) -> list[str]:
    header, records = _parse_lines(text, TRUTH_FORMAT)
    count = header.get("count")
    if not isinstance(count, int) or count < 0:
        raise StreamParseError("header count must be a non-negative integer", 1)
    labels: list[Optional[str]] = [None] * count
    for line_number, rec in records:
        _require(rec, ("id", "label"), line_number)
        idx = rec["id"]
        if not isinstance(idx, int) or not (0 <= idx < count):
            raise StreamValidationError(f"id {idx!r} out of range", line_number)
        if rec["label"] not in ("true", "clutter"):
            raise StreamValidationError(f"label must be true|clutter, got {rec['label']!r}", line_number)
        labels[idx] = rec["label"]
    if any(label is None for label in labels):
        raise StreamValidationError("sidecar is missing ids", None)
    return labels  # type: ignore[return-value]


# --------------------------------------------------------------------------
# Trajectory (no calibration embedded: calibration is config-owned)


def write_trajectory(points: list[TrackPoint], meta: VideoMeta) -> str:
    header = {
        "format": TRAJECTORY_FORMAT,
        "version": FORMAT_VERSION,
        "width": meta.frame_width,
        "height": meta.frame_height,
        "fps": meta.fps,
        "point_count": len(points),
    }
    records = []
    for p in points:
        rec: dict[str, Any] = {
            "frame": p.frame_index,
            "x": p.position.x,
            "y": p.position.y,
            "source": p.source.value,
        }
        if p.box is not None:
            rec["x1"], rec["y1"], rec["x2"], rec["y2"] = p.box.x1, p.box.y1, p.box.x2, p.box.y2
        if p.confidence is not None:
            rec["confidence"] = p.confidence
        if p.composite_score is not None:
            rec["score"] = p.composite_score
        if p.velocity is not None:
            rec["vx"], rec["vy"] = p.velocity
        records.append(rec)
    return dumps_jsonl(header, records)


@dataclass(frozen=True)
class TrajectoryFile:
    meta: VideoMeta
    points: list[TrackPoint]


def read_trajectory(text: str) -> TrajectoryFile:
    header, records = _parse_lines(text, TRAJECTORY_FORMAT)
    for key in ("width", "height", "fps"):
        if key not in header:
            raise StreamParseError(f"header missing {key!r}", 1)
    meta = VideoMeta(
        frame_width=_finite_number(header["width"], "width", 1),
        frame_height=_finite_number(header["height"], "height", 1),
        fps=_finite_number(header["fps"], "fps", 1),
    )
    points: list[TrackPoint] = []
    last_frame = -1
    for line_number, rec in records:
        _require(rec, ("frame", "x", "y", "source"), line_number)
        frame = rec["frame"]
        if not isinstance(frame, int) or frame < 0:
            raise StreamParseError("frame must be a non-negative integer", line_number)
        if frame <= last_frame:
            raise StreamValidationError("trajectory frames must strictly increase", line_number)
        last_frame = frame
        try:
            source = PointSource(rec["source"])
        except ValueError:
            raise StreamValidationError(f"unknown source {rec['source']!r}", line_number) from None
        box = None
        if "x1" in rec:
            _require(rec, ("x1", "y1", "x2", "y2"), line_number)
            box = BoundingBox(
                _finite_number(rec["x1"], "x1", line_number),
                _finite_number(rec["y1"], "y1", line_number),
                _finite_number(rec["x2"], "x2", line_number),
                _finite_number(rec["y2"], "y2", line_number),
            )
        velocity = None
        if "vx" in rec or "vy" in rec:
            _require(rec, ("vx", "vy"), line_number)
            velocity = (
                _finite_number(rec["vx"], "vx", line_number),
                _finite_number(rec["vy"], "vy", line_number),
            )
        points.append(
            TrackPoint(
                frame_index=frame,
                position=PixelPoint(
                    _finite_number(rec["x"], "x", line_number),
                    _finite_number(rec["y"], "y", line_number),
                ),
                source=source,
                box=box,
                confidence=rec.get("confidence"),
                composite_score=rec.get("score"),
                velocity=velocity,
            )
        )
    return TrajectoryFile(meta=meta, points=points)


# --------------------------------------------------------------------------
# Speed report


def _sample_record(s: SpeedSample) -> dict:
    return {
        "from_frame": s.from_frame,
        "to_frame": s.to_frame,
        "speed_kmh": s.speed_kmh,
        "from_x": s.from_point.x,
        "from_y": s.from_point.y,
        "to_x": s.to_point.x,
        "to_y": s.to_point.y,
    }


def write_speed_report(report: SpeedReport) -> str:
    header: dict[str, Any] = {
        "format": SPEEDREPORT_FORMAT,
        "version": FORMAT_VERSION,
        "mode": report.measurement_point_mode.value,
        "sample_count": len(report.samples),
        "peak_from_frame": report.peak.from_frame,
        "peak_to_frame": report.peak.to_frame,
        "peak_kmh": report.peak.speed_kmh,
    }
    if report.at_marker is not None:
        header["at_marker_from_frame"] = report.at_marker.from_frame
        header["at_marker_to_frame"] = report.at_marker.to_frame
        header["at_marker_kmh"] = report.at_marker.speed_kmh
    else:
        header["at_marker_from_frame"] = None
        header["at_marker_to_frame"] = None
        header["at_marker_kmh"] = None
    return dumps_jsonl(header, (_sample_record(s) for s in report.samples))


def _sample_from_record(rec: dict, line_number: int) -> SpeedSample:
    _require(rec, ("from_frame", "to_frame", "speed_kmh", "from_x", "from_y", "to_x", "to_y"), line_number)
    return SpeedSample(
        from_frame=rec["from_frame"],
        to_frame=rec["to_frame"],
        speed_kmh=_finite_number(rec["speed_kmh"], "speed_kmh", line_number),
        from_point=PixelPoint(
            _finite_number(rec["from_x"], "from_x", line_number),
            _finite_number(rec["from_y"], "from_y", line_number),
        ),
        to_point=PixelPoint(
            _finite_number(rec["to_x"], "to_x", line_number),
            _finite_number(rec["to_y"], "to_y", line_number),
        ),
    )


def read_speed_report(text: str) -> SpeedReport:
    header, records = _parse_lines(text, SPEEDREPORT_FORMAT)
    samples = [_sample_from_record(rec, ln) for ln, rec in records]
    if not samples:
        raise StreamValidationError("speed report has no samples", None)
    mode = MeasurementPointMode(header.get("mode", "center"))
    by_pair = {(s.from_frame, s.to_frame): s for s in samples}
    peak_key = (header.get("peak_from_frame"), header.get("peak_to_frame"))
    if peak_key not in by_pair:
        raise StreamValidationError("peak does not reference a sample", 1)
    at_marker = None
    if header.get("at_marker_from_frame") is not None:
        marker_key = (header["at_marker_from_frame"], header["at_marker_to_frame"])
        if marker_key not in by_pair:
            raise StreamValidationError("at_marker does not reference a sample", 1)
        at_marker = by_pair[marker_key]
    return SpeedReport(
        samples=samples,
        peak=by_pair[peak_key],
        measurement_point_mode=mode,
        at_marker=at_marker,
    )


# --------------------------------------------------------------------------
# Error summary


def write_error_summary(summary: "ErrorSummary") -> str:
    header = {"format": ERRORSUMMARY_FORMAT, "version": FORMAT_VERSION}
    record = {
        "mae_kmh": summary.mae_kmh,
        "rmse_kmh": summary.rmse_kmh,
        "mean_signed_error_kmh": summary.mean_signed_error_kmh,
        "n": summary.n,
    }
    return dumps_jsonl(header, [record])


def read_error_summary(text: str) -> dict:
    _, records = _parse_lines(text, ERRORSUMMARY_FORMAT)
    if len(records) != 1:
        raise StreamValidationError("error summary must hold exactly one record", None)
    line_number, rec = records[0]
    _require(rec, ("mae_kmh", "rmse_kmh", "mean_signed_error_kmh", "n"), line_number)
    return rec


# --------------------------------------------------------------------------
# Paired speeds


def write_paired_speeds(trials: list[tuple[str, float, float]]) -> str:
    header = {"format": PAIREDSPEEDS_FORMAT, "version": FORMAT_VERSION, "trial_count": len(trials)}
    records = [
        {"label": label, "reference_kmh": ref, "candidate_kmh": cand}
        for label, ref, cand in trials
    ]
    return dumps_jsonl(header, records)


def read_paired_speeds(text: str) -> list[tuple[str, float, float]]:
    _, records = _parse_lines(text, PAIREDSPEEDS_FORMAT)
    trials = []
    for line_number, rec in records:
        _require(rec, ("label", "reference_kmh", "candidate_kmh"), line_number)
        ref = _finite_number(rec["reference_kmh"], "reference_kmh", line_number)
        cand = _finite_number(rec["candidate_kmh"], "candidate_kmh", line_number)
        if ref < 0 or cand < 0:
            raise StreamValidationError("speeds must be >= 0", line_number)
        trials.append((str(rec["label"]), ref, cand))
    if not trials:
        raise StreamValidationError("paired-speeds file has no trials", None)
    return trials


# --------------------------------------------------------------------------
# Ground-truth flight (frame samples only: enough to act as an oracle)


def write_flight(flight: GroundTruthFlight, meta: VideoMeta) -> str:
    p = flight.params
    header = {
        "format": FLIGHT_FORMAT,
        "version": FORMAT_VERSION,
        "launch_speed_mps": p.launch_speed,
        "launch_angle_deg": p.launch_angle_deg,
        "launch_height_m": p.launch_height,
        "terminal_speed_mps": p.terminal_speed,
        "gravity": p.gravity,
        "duration_s": p.duration,
        "integration_step_s": p.integration_step,
        "fps": meta.fps,
        "pixels_per_meter": flight.projection.pixels_per_meter,
        "origin_x": flight.projection.origin.x,
        "origin_y": flight.projection.origin.y,
    }
    records = []
    for s in flight.frame_samples:
        records.append(
            {
                "frame": s.frame_index,
                "t": s.t,
                "px": s.pixel.x,
                "py": s.pixel.y,
                "x_m": s.world_position[0],
                "y_m": s.world_position[1],
                "vx_mps": s.world_velocity[0],
                "vy_mps": s.world_velocity[1],
                "speed_mps": s.speed_mps,
            }
        )
    return dumps_jsonl(header, records)


@dataclass(frozen=True)
class FlightFile:
    header: dict
    frame_samples: list[FrameSample]

    @property
    def fps(self) -> float:
        return float(self.header["fps"])


def read_flight(text: str) -> FlightFile:
    header, records = _parse_lines(text, FLIGHT_FORMAT)
    if "fps" not in header:
        raise StreamParseError("header missing 'fps'", 1)
    fps = _finite_number(header["fps"], "fps", 1)
    if fps <= 0:
        raise StreamValidationError("fps must be positive", 1)
    ppm = _finite_number(header.get("pixels_per_meter", 1.0), "pixels_per_meter", 1)
    samples = []
    for line_number, rec in records:
        _require(rec, ("frame", "t", "px", "py", "x_m", "y_m", "vx_mps", "vy_mps", "speed_mps"), line_number)
        vx = _finite_number(rec["vx_mps"], "vx_mps", line_number)
        vy = _finite_number(rec["vy_mps"], "vy_mps", line_number)
        samples.append(
            FrameSample(
                frame_index=rec["frame"],
                t=_finite_number(rec["t"], "t", line_number),
                pixel=PixelPoint(
                    _finite_number(rec["px"], "px", line_number),
                    _finite_number(rec["py"], "py", line_number),
                ),
                world_position=(
                    _finite_number(rec["x_m"], "x_m", line_number),
                    _finite_number(rec["y_m"], "y_m", line_number),
                ),
                world_velocity=(vx, vy),
                speed_mps=_finite_number(rec["speed_mps"], "speed_mps", line_number),
                pixel_velocity=(vx * ppm / fps, -vy * ppm / fps),
            )
        )
    return FlightFile(header=header, frame_samples=samples)


# --------------------------------------------------------------------------
# Bundled radar comparison trials


def write_radar_comparison(trials: list[dict]) -> str:
    header = {"format": RADAR_COMPARISON_FORMAT, "version": FORMAT_VERSION, "trial_count": len(trials)}
    records = [
        {
            "trial": t["trial"],
            "radar_kmh": t["radar_kmh"],
            "peak_kmh": t["peak_kmh"],
            "at_net_kmh": t["at_net_kmh"],
        }
        for t in trials
    ]
    return dumps_jsonl(header, records)


def read_radar_comparison(text: str) -> list[dict]:
    _, records = _parse_lines(text, RADAR_COMPARISON_FORMAT)
    trials = []
    for line_number, rec in records:
        _require(rec, ("trial", "radar_kmh", "peak_kmh", "at_net_kmh"), line_number)
        trials.append(
            {
                "trial": rec["trial"],
                "radar_kmh": _finite_number(rec["radar_kmh"], "radar_kmh", line_number),
                "peak_kmh": _finite_number(rec["peak_kmh"], "peak_kmh", line_number),
                "at_net_kmh": _finite_number(rec["at_net_kmh"], "at_net_kmh", line_number),
            }
        )
    if not trials:
        raise StreamValidationError("radar comparison file has no trials", None)
    return trials


# --------------------------------------------------------------------------
# Small file helpers


def read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")
