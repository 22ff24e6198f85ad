"""Per-frame detection selection: kinematic gating plus composite scoring.

Each frame, candidates that imply an implausible speed against the last
accepted point are discarded; survivors are ranked by a weighted blend of
detector confidence and proximity to the Kalman prediction, and the winner
extends the track. Detection dropouts are coasted on prediction alone, up
to a cap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from .calibration import ScaleCalibration, VideoMeta, kmh_per_pixel_step
from .errors import CalibrationMissingError, InputContractError
from .geometry import BoundingBox, Detection, PixelPoint
from .kalman import KalmanConfig, KalmanState, kalman_init, kalman_predict, kalman_update


@dataclass(frozen=True)
class TrackerConfig:
    min_speed_kmh: float = 5.0
    max_speed_kmh: float = 375.0
    confidence_weight: float = 0.3
    proximity_weight: float = 0.7
    proximity_norm_divisor: float = 4.0
    max_coast_frames: int = 8
    min_confidence: float = 0.1

    def __post_init__(self):
        if self.confidence_weight < 0 or self.proximity_weight < 0:
            raise InputContractError("score weights must be >= 0")
        if abs(self.confidence_weight + self.proximity_weight - 1.0) > 1e-9:
            raise InputContractError("confidence_weight + proximity_weight must equal 1")
        if not (0 < self.min_speed_kmh < self.max_speed_kmh):
            raise InputContractError("need 0 < min_speed_kmh < max_speed_kmh")
        if self.proximity_norm_divisor <= 0:
            raise InputContractError("proximity_norm_divisor must be positive")
        if self.max_coast_frames < 0:
            raise InputContractError("max_coast_frames must be >= 0")


class PointSource(enum.Enum):
    DETECTED = "detected"
    COASTED = "coasted"
    USER_CORRECTED = "user_corrected"


@dataclass(frozen=True)
class TrackPoint:
    """One accepted per-frame track position with provenance."""

    frame_index: int
    position: PixelPoint
    source: PointSource
    box: Optional[BoundingBox] = None
    confidence: Optional[float] = None
    composite_score: Optional[float] = None
    # Filter posterior velocity (pixels/frame); None for user corrections.
    velocity: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.source is PointSource.DETECTED:
            if self.box is None or self.confidence is None or self.composite_score is None:
                raise InputContractError("detected points need box, confidence and composite_score")
        elif self.source is PointSource.COASTED:
            if self.box is not None:
                raise InputContractError("coasted points carry no box")


@dataclass(frozen=True)
class Trajectory:
    points: list[TrackPoint]
    meta: VideoMeta
    calibration: Optional[ScaleCalibration]  # None until a config provides one

    def __post_init__(self):
        frames = [p.frame_index for p in self.points]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise InputContractError("trajectory frame indices must strictly increase")


class GateReason(enum.Enum):
    TOO_SLOW = "too_slow"
    TOO_FAST = "too_fast"
    LOW_CONFIDENCE = "low_confidence"


@dataclass(frozen=True)
class GateDecision:
    accepted: bool
    implied_speed_kmh: Optional[float]  # None when rejected before the speed check
    reason: Optional[GateReason] = None


def implied_speed_kmh(
    prev: PixelPoint,
    cur: PixelPoint,
    frames_elapsed: int,
    cal: ScaleCalibration,
    meta: VideoMeta,
) -> float:
    """Physical speed implied by a pixel displacement over a frame gap."""
    if frames_elapsed < 1:
        raise InputContractError(f"frames_elapsed must be >= 1, got {frames_elapsed}")
    return prev.distance_to(cur) * kmh_per_pixel_step(cal, meta) / frames_elapsed


def heuristic_gate(
    candidate: Detection,
    last_accepted: TrackPoint,
    frames_elapsed: int,
    cal: ScaleCalibration,
    meta: VideoMeta,
    cfg: TrackerConfig,
) -> GateDecision:
    """Accept a candidate iff its implied speed is inside the plausible band.

    The band is closed at both ends: speeds exactly at the limits pass.
    Below the band reads as a static false positive, above it as an
    extreme outlier.
    """
    speed = implied_speed_kmh(last_accepted.position, candidate.box.center(), frames_elapsed, cal, meta)
    if speed < cfg.min_speed_kmh:
        return GateDecision(False, speed, GateReason.TOO_SLOW)
    if speed > cfg.max_speed_kmh:
        return GateDecision(False, speed, GateReason.TOO_FAST)
    return GateDecision(True, speed)


def proximity_score(
    detection_center: PixelPoint,
    predicted: PixelPoint,
    meta: VideoMeta,
    cfg: TrackerConfig,
) -> float:
    """Closeness to the prediction, normalized by a quarter frame width.

    The frame-width normalization keeps the score, and hence the per-frame
    argmax, independent of video resolution.
    """
    d = detection_center.distance_to(predicted)
    return max(0.0, 1.0 - d / (meta.frame_width / cfg.proximity_norm_divisor))


def composite_score(confidence: float, proximity: float, cfg: TrackerConfig) -> float:
    """Weighted blend of detector confidence and prediction proximity."""
    if not (0.0 <= confidence <= 1.0):
        raise InputContractError(f"confidence must be in [0, 1], got {confidence}")
    if not (0.0 <= proximity <= 1.0):
        raise InputContractError(f"proximity must be in [0, 1], got {proximity}")
    return cfg.confidence_weight * confidence + cfg.proximity_weight * proximity


@dataclass(frozen=True)
class CandidateEvaluation:
    """Diagnostic record of how one detection fared on one frame."""

    detection: Detection
    gate: GateDecision
    proximity: Optional[float] = None
    composite: Optional[float] = None
    selected: bool = False


@dataclass(frozen=True)
class FrameDiagnostics:
    """What the tracker saw and decided on one processed frame."""

    frame_index: int
    predicted: Optional[PixelPoint]
    candidates: list[CandidateEvaluation] = field(default_factory=list)


def _seed_candidate(detections: list[Detection]) -> Detection:
    # Highest confidence seeds the track; ties by smaller x1, then y1.
    return min(detections, key=lambda d: (-d.confidence, d.box.x1, d.box.y1))


def track(
    frames: list[list[Detection]],
    cal: ScaleCalibration,
    meta: VideoMeta,
    kcfg: KalmanConfig,
    tcfg: TrackerConfig,
) -> Trajectory:
    """Fold per-frame detection lists into a single trajectory.

    Input detections are expected to be confidence-filtered and
    NMS-suppressed already (ingest responsibility).
    """
    trajectory, _ = track_with_diagnostics(frames, cal, meta, kcfg, tcfg)
    return trajectory


def track_with_diagnostics(
    frames: list[list[Detection]],
    cal: ScaleCalibration,
    meta: VideoMeta,
    kcfg: KalmanConfig,
    tcfg: TrackerConfig,
) -> tuple[Trajectory, list[FrameDiagnostics]]:
    """Like track(), also returning per-frame predictions and candidate scores."""
    if cal is None:
        raise CalibrationMissingError("tracking requires a scale calibration for speed gating")

    points: list[TrackPoint] = []
    diagnostics: list[FrameDiagnostics] = []
    state: Optional[KalmanState] = None
    last_accepted: Optional[TrackPoint] = None
    coast_run = 0

    for frame_index, detections in enumerate(frames):
        if state is None:
            # Track birth: the frame's highest-confidence detection seeds
            # both the track and the filter. The seed's proximity is 1 by
            # construction (the filter is initialized at the measurement).
            eligible = [d for d in detections if d.confidence >= tcfg.min_confidence]
            if not eligible:
                diagnostics.append(
                    FrameDiagnostics(
                        frame_index,
                        None,
                        candidates=[
                            CandidateEvaluation(
                                d, GateDecision(False, None, GateReason.LOW_CONFIDENCE)
                            )
                            for d in detections
                        ],
                    )
                )
                continue
            seed = _seed_candidate(eligible)
            center = seed.box.center()
            state = kalman_init(center, kcfg)
            point = TrackPoint(
                frame_index=frame_index,
                position=center,
                source=PointSource.DETECTED,
                box=seed.box,
                confidence=seed.confidence,
                composite_score=composite_score(seed.confidence, 1.0, tcfg),
                velocity=state.velocity,
            )
            points.append(point)
            last_accepted = point
            diagnostics.append(
                FrameDiagnostics(
                    frame_index,
                    predicted=None,
                    candidates=[
                        CandidateEvaluation(
                            d,
                            GateDecision(True, None)
                            if d.confidence >= tcfg.min_confidence
                            else GateDecision(False, None, GateReason.LOW_CONFIDENCE),
                            proximity=None,
                            composite=None,
                            selected=d is seed,
                        )
                        for d in detections
                    ],
                )
            )
            continue

        predicted_state = kalman_predict(state, kcfg)
        predicted = predicted_state.position
        frames_elapsed = frame_index - last_accepted.frame_index

        evaluations: list[CandidateEvaluation] = []
        winner_idx: Optional[int] = None
        best_key: Optional[tuple[float, float, float]] = None
        for idx, det in enumerate(detections):
            if det.confidence < tcfg.min_confidence:
                evaluations.append(
                    CandidateEvaluation(det, GateDecision(False, None, GateReason.LOW_CONFIDENCE))
                )
                continue
            decision = heuristic_gate(det, last_accepted, frames_elapsed, cal, meta, tcfg)
            if not decision.accepted:
                evaluations.append(CandidateEvaluation(det, decision))
                continue
            center = det.box.center()
            prox = proximity_score(center, predicted, meta, tcfg)
            score = composite_score(det.confidence, prox, tcfg)
            evaluations.append(CandidateEvaluation(det, decision, prox, score))
            # Ties: higher confidence, then smaller distance to prediction.
            key = (score, det.confidence, -center.distance_to(predicted))
            if best_key is None or key > best_key:
                best_key = key
                winner_idx = idx

        if winner_idx is not None:
            ev = evaluations[winner_idx]
            center = ev.detection.box.center()
            state = kalman_update(predicted_state, center, kcfg)
            point = TrackPoint(
                frame_index=frame_index,
                position=center,
                source=PointSource.DETECTED,
                box=ev.detection.box,
                confidence=ev.detection.confidence,
                composite_score=ev.composite,
                velocity=state.velocity,
            )
            points.append(point)
            last_accepted = point
            coast_run = 0
            evaluations[winner_idx] = CandidateEvaluation(
                ev.detection, ev.gate, ev.proximity, ev.composite, selected=True
            )
        else:
            coast_run += 1
            if coast_run > tcfg.max_coast_frames:
                diagnostics.append(FrameDiagnostics(frame_index, predicted, evaluations))
                break  # track terminates; prediction drift is unbounded
            state = predicted_state
            points.append(
                TrackPoint(
                    frame_index=frame_index,
                    position=predicted,
                    source=PointSource.COASTED,
                    velocity=predicted_state.velocity,
                )
            )

        diagnostics.append(FrameDiagnostics(frame_index, predicted, evaluations))

    return Trajectory(points=points, meta=meta, calibration=cal), diagnostics
