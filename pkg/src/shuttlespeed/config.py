"""Pipeline configuration: one schema shared by the config file, CLI flags,
and the session API, so every entry point drives the identical core path."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .calibration import NetMarker, ScaleCalibration, TravelSide, compute_scale
from .errors import InputContractError
from .geometry import PixelPoint
from .kalman import KalmanConfig
from .kinematics import MeasurementPointMode
from .tracker import TrackerConfig


@dataclass(frozen=True)
class IngestConfig:
    """Detection-stream admission thresholds (inclusive confidence bound)."""

    min_confidence: float = 0.1
    nms_iou: float = 0.45

    def __post_init__(self):
        if not (0.0 <= self.min_confidence <= 1.0):
            raise InputContractError("min_confidence must be in [0, 1]")
        if not (0.0 < self.nms_iou <= 1.0):
            raise InputContractError("nms_iou must be in (0, 1]")


@dataclass(frozen=True)
class PipelineConfig:
    calibration: Optional[ScaleCalibration] = None
    net_marker: Optional[NetMarker] = None
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    kalman: KalmanConfig = field(default_factory=KalmanConfig)
    ingest: IngestConfig = field(default_factory=IngestConfig)
    measurement_point_mode: MeasurementPointMode = MeasurementPointMode.LEADING_EDGE
    include_coasted: bool = False


def _point_from(value: Any, name: str) -> PixelPoint:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise InputContractError(f"{name} must be a [x, y] pair")
    return PixelPoint(float(value[0]), float(value[1]))


def config_from_dict(data: dict) -> PipelineConfig:
    """Build a PipelineConfig from its JSON object form.

    Unknown keys are rejected so config typos fail loudly.
    """
    known = {
        "calibration",
        "net_marker",
        "tracker",
        "kalman",
        "ingest",
        "measurement_point_mode",
        "include_coasted",
    }
    unknown = set(data) - known
    if unknown:
        raise InputContractError(f"unknown config keys: {sorted(unknown)}")

    calibration = None
    if data.get("calibration") is not None:
        c = data["calibration"]
        calibration = compute_scale(
            _point_from(c["point_a"], "point_a"),
            _point_from(c["point_b"], "point_b"),
            float(c["real_distance_m"]),
        )

    net_marker = None
    if data.get("net_marker") is not None:
        m = data["net_marker"]
        net_marker = NetMarker(marker_x=float(m["marker_x"]), side=TravelSide(m["side"]))

    tracker = TrackerConfig(**data.get("tracker", {}))
    kalman = KalmanConfig(**data.get("kalman", {}))
    ingest = IngestConfig(**data.get("ingest", {}))
    mode = MeasurementPointMode(data.get("measurement_point_mode", "leading_edge"))
    include_coasted = bool(data.get("include_coasted", False))
    return PipelineConfig(
        calibration=calibration,
        net_marker=net_marker,
        tracker=tracker,
        kalman=kalman,
        ingest=ingest,
        measurement_point_mode=mode,
        include_coasted=include_coasted,
    )


def config_to_dict(cfg: PipelineConfig) -> dict:
    """Serialize to the JSON object form (raw calibration inputs, not the
    derived scale, which is recomputed deterministically on load)."""
    data: dict[str, Any] = {}
    if cfg.calibration is not None:
        data["calibration"] = {
            "point_a": [cfg.calibration.point_a.x, cfg.calibration.point_a.y],
            "point_b": [cfg.calibration.point_b.x, cfg.calibration.point_b.y],
            "real_distance_m": cfg.calibration.real_distance,
        }
    else:
        data["calibration"] = None
    if cfg.net_marker is not None:
        data["net_marker"] = {"marker_x": cfg.net_marker.marker_x, "side": cfg.net_marker.side.value}
    else:
        data["net_marker"] = None
    data["tracker"] = {
        "min_speed_kmh": cfg.tracker.min_speed_kmh,
        "max_speed_kmh": cfg.tracker.max_speed_kmh,
        "confidence_weight": cfg.tracker.confidence_weight,
        "proximity_weight": cfg.tracker.proximity_weight,
        "proximity_norm_divisor": cfg.tracker.proximity_norm_divisor,
        "max_coast_frames": cfg.tracker.max_coast_frames,
        "min_confidence": cfg.tracker.min_confidence,
    }
    data["kalman"] = {
        "process_noise_scale": cfg.kalman.process_noise_scale,
        "measurement_noise": cfg.kalman.measurement_noise,
        "initial_position_variance": cfg.kalman.initial_position_variance,
        "initial_velocity_variance": cfg.kalman.initial_velocity_variance,
    }
    data["ingest"] = {
        "min_confidence": cfg.ingest.min_confidence,
        "nms_iou": cfg.ingest.nms_iou,
    }
    data["measurement_point_mode"] = cfg.measurement_point_mode.value
    data["include_coasted"] = cfg.include_coasted
    return data


def load_config(path: str | Path) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputContractError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputContractError(f"config file {path} must hold a JSON object")
    return config_from_dict(data)


def merge_config(base: PipelineConfig, overrides: dict) -> PipelineConfig:
    """Overlay a partial config dict (same schema) onto an existing config."""
    merged = config_to_dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return config_from_dict(merged)
