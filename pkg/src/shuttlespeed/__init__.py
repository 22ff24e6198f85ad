"""Measure badminton smash speeds from per-frame shuttlecock detections.

The pipeline: ingest a detection stream, fold it into a single trajectory
with a constant-velocity Kalman filter plus kinematic gating, then convert
pixel displacements to km/h through a two-point scale calibration. A drag
simulator provides exact flights for testing, and the eval kit reproduces
the bundled radar-gun comparison.
"""

from .calibration import (
    NetMarker,
    ScaleCalibration,
    TravelSide,
    VideoMeta,
    compute_scale,
    kmh_per_pixel_step,
)
from .config import (
    IngestConfig,
    PipelineConfig,
    config_from_dict,
    config_to_dict,
    load_config,
    merge_config,
)
from .errors import (
    CalibrationMissingError,
    DegenerateCalibrationError,
    InputContractError,
    InsufficientDataError,
    ShuttleSpeedError,
    StreamParseError,
    StreamValidationError,
)
from .evalkit import (
    ErrorSummary,
    PairedSpeeds,
    end_to_end_accuracy,
    error_summary,
    load_radar_trials,
    radar_trial_metrics,
)
from .geometry import BoundingBox, Detection, PixelPoint, iou, nms
from .kalman import KalmanConfig, KalmanState, kalman_init, kalman_predict, kalman_update
from .kinematics import (
    MeasurementPointMode,
    SpeedReport,
    SpeedSample,
    leading_edge_point,
    segment_speed,
    speed_report,
)
from .pipeline import StreamResult, filter_frames, ingest, run_stream, run_tracking
from .simulator import (
    ConfidenceModel,
    CorruptedStream,
    CorruptionParams,
    FlightParams,
    FrameProjection,
    GroundTruthFlight,
    corrupt,
    frame_chord_speeds_kmh,
    ground_truth_peak_kmh,
    simulate_flight,
)
from .tracker import (
    GateDecision,
    GateReason,
    PointSource,
    TrackerConfig,
    TrackPoint,
    Trajectory,
    composite_score,
    heuristic_gate,
    implied_speed_kmh,
    proximity_score,
    track,
    track_with_diagnostics,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "CalibrationMissingError",
    "ConfidenceModel",
    "CorruptedStream",
    "CorruptionParams",
    "DegenerateCalibrationError",
    "Detection",
    "ErrorSummary",
    "FlightParams",
    "FrameProjection",
    "GateDecision",
    "GateReason",
    "GroundTruthFlight",
    "IngestConfig",
    "InputContractError",
    "InsufficientDataError",
    "KalmanConfig",
    "KalmanState",
    "MeasurementPointMode",
    "NetMarker",
    "PairedSpeeds",
    "PipelineConfig",
    "PixelPoint",
    "PointSource",
    "ScaleCalibration",
    "ShuttleSpeedError",
    "SpeedReport",
    "SpeedSample",
    "StreamParseError",
    "StreamResult",
    "StreamValidationError",
    "TrackPoint",
    "TrackerConfig",
    "Trajectory",
    "TravelSide",
    "VideoMeta",
    "composite_score",
    "compute_scale",
    "config_from_dict",
    "config_to_dict",
    "corrupt",
    "end_to_end_accuracy",
    "error_summary",
    "filter_frames",
    "frame_chord_speeds_kmh",
    "ground_truth_peak_kmh",
    "heuristic_gate",
    "implied_speed_kmh",
    "ingest",
    "iou",
    "kalman_init",
    "kalman_predict",
    "kalman_update",
    "kmh_per_pixel_step",
    "leading_edge_point",
    "load_config",
    "load_radar_trials",
    "merge_config",
    "nms",
    "proximity_score",
    "radar_trial_metrics",
    "run_stream",
    "run_tracking",
    "segment_speed",
    "simulate_flight",
    "speed_report",
    "track",
    "track_with_diagnostics",
]
