"""HTTP session API under /v1: upload a detection stream, calibrate, track,
correct points, and read speed reports.

Session state machine: created -> calibrated -> tracked -> verified ->
reported. Transitions move forward, with two sanctioned rewinds: a
correction drops a reported session back to verified (the cached report no
longer matches), and recalibration drops the session back to calibrated
(the trajectory was computed under the old scale, so it and any
corrections are discarded).

Mutations are idempotent per (session, request_id): replaying a request_id
returns the recorded response without reapplying the change. Every
correction is logged with enough detail that replaying the log over the
raw tracker output reproduces the working trajectory exactly.

State persists as one JSON file per session; anything derivable
(diagnostics, filtered frames, reports) is recomputed on demand from the
stored stream + config + corrections, which are the durable facts.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .config import PipelineConfig, config_from_dict, config_to_dict, merge_config
from .errors import (
    CalibrationMissingError,
    InputContractError,
    ShuttleSpeedError,
)
from .formats import (
    DetectionStream,
    read_detection_stream,
    write_speed_report,
    write_trajectory,
)
from .geometry import PixelPoint
from .kinematics import SpeedReport, speed_report
from .pipeline import ingest, run_tracking_with_diagnostics
from .tracker import (
    FrameDiagnostics,
    PointSource,
    TrackPoint,
    Trajectory,
)

API_PREFIX = "/v1"

_STATUS_ORDER = ["created", "calibrated", "tracked", "verified", "reported"]


class ApiError(ShuttleSpeedError):
    """Service-level failure with an HTTP status."""

    def __init__(self, status_code: int, code: str, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.code = code


def _not_found(session_id: str) -> ApiError:
    return ApiError(404, "not_found", f"no session {session_id!r}")


def _conflict(message: str) -> ApiError:
    return ApiError(409, "conflict", message)


# --------------------------------------------------------------------------
# Session state


@dataclass
class Session:
    session_id: str
    stream_text: str
    status: str = "created"
    config_data: dict = field(default_factory=lambda: config_to_dict(PipelineConfig()))
    raw_points: list[dict] = field(default_factory=list)  # tracker output, JSON form
    corrections: list[dict] = field(default_factory=list)
    idempotency: dict[str, dict] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    # Derived, rebuilt on demand; never persisted.
    _stream_cache: Optional[DetectionStream] = field(default=None, repr=False)
    _diagnostics_cache: Optional[list[FrameDiagnostics]] = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "status": self.status,
            "stream_text": self.stream_text,
            "config": self.config_data,
            "raw_points": self.raw_points,
            "corrections": self.corrections,
            "idempotency": self.idempotency,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Session":
        return cls(
            session_id=data["session_id"],
            stream_text=data["stream_text"],
            status=data["status"],
            config_data=data["config"],
            raw_points=data["raw_points"],
            corrections=data["corrections"],
            idempotency=data["idempotency"],
        )

    # -- derived state ----------------------------------------------------

    def config(self) -> PipelineConfig:
        return config_from_dict(self.config_data)

    def stream(self) -> DetectionStream:
        if self._stream_cache is None:
            self._stream_cache = ingest(self.stream_text, self.config())
        return self._stream_cache

    def invalidate_derived(self) -> None:
        self._stream_cache = None
        self._diagnostics_cache = None

    def has_trajectory(self) -> bool:
        return self.status in ("tracked", "verified", "reported")

    def working_points(self) -> list[TrackPoint]:
        """Raw tracker output with the corrections log replayed over it."""
        points = [_point_from_json(p) for p in self.raw_points]
        return replay_corrections(points, self.corrections)

    def trajectory(self) -> Trajectory:
        cfg = self.config()
        return Trajectory(
            points=self.working_points(),
            meta=self.stream().meta,
            calibration=cfg.calibration,
        )

    def report(self) -> SpeedReport:
        cfg = self.config()
        return speed_report(
            self.trajectory(),
            marker=cfg.net_marker,
            mode=cfg.measurement_point_mode,
            include_coasted=cfg.include_coasted,
        )

    def diagnostics(self) -> list[FrameDiagnostics]:
        if self._diagnostics_cache is None:
            run = run_tracking_with_diagnostics(self.stream(), self.config())
            self._diagnostics_cache = run.diagnostics
        return self._diagnostics_cache


def _point_to_json(p: TrackPoint) -> dict:
    return {
        "frame": p.frame_index,
        "x": p.position.x,
        "y": p.position.y,
        "source": p.source.value,
        "box": None if p.box is None else [p.box.x1, p.box.y1, p.box.x2, p.box.y2],
        "confidence": p.confidence,
        "score": p.composite_score,
        "velocity": None if p.velocity is None else [p.velocity[0], p.velocity[1]],
    }


def _point_from_json(d: dict) -> TrackPoint:
    from .geometry import BoundingBox

    box = None if d["box"] is None else BoundingBox(*d["box"])
    velocity = None if d["velocity"] is None else (d["velocity"][0], d["velocity"][1])
    return TrackPoint(
        frame_index=d["frame"],
        position=PixelPoint(d["x"], d["y"]),
        source=PointSource(d["source"]),
        box=box,
        confidence=d["confidence"],
        composite_score=d["score"],
        velocity=velocity,
    )


def replay_corrections(points: list[TrackPoint], corrections: list[dict]) -> list[TrackPoint]:
    """Apply a corrections log to tracker output, oldest first.

    This is the audit contract: the working trajectory is always exactly
    replay_corrections(raw_points, corrections).
    """
    result = list(points)
    for entry in corrections:
        frame = entry["frame"]
        idx = next((i for i, p in enumerate(result) if p.frame_index == frame), None)
        if entry["kind"] == "delete":
            if idx is not None:
                del result[idx]
        elif entry["kind"] == "patch":
            if idx is None:
                continue  # point was deleted later in history; log stays append-only
            result[idx] = TrackPoint(
                frame_index=frame,
                position=PixelPoint(entry["new"][0], entry["new"][1]),
                source=PointSource.USER_CORRECTED,
            )
        else:
            raise InputContractError(f"unknown correction kind {entry['kind']!r}")
    return result


# --------------------------------------------------------------------------
# Store


def default_state_dir() -> Path:
    env = os.environ.get("SHUTTLESPEED_STATE_DIR")
    if env:
        return Path(env)
    return Path(tempfile.gettempdir()) / "shuttlespeed-sessions"


class SessionStore:
    """In-memory sessions backed by one JSON file each."""

    def __init__(self, state_dir: Path):
        self._dir = state_dir
        self._dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def _path(self, session_id: str) -> Path:
        return self._dir / f"{session_id}.json"

    def create(self, stream_text: str, config_data: Optional[dict] = None) -> Session:
        session = Session(session_id=uuid.uuid4().hex, stream_text=stream_text)
        if config_data is not None:
            session.config_data = config_data
            if config_from_dict(config_data).calibration is not None:
                session.status = "calibrated"
        with self._lock:
            self._sessions[session.session_id] = session
        self.save(session)
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id in self._sessions:
                return self._sessions[session_id]
        path = self._path(session_id)
        if not path.is_file():
            raise _not_found(session_id)
        session = Session.from_json(json.loads(path.read_text(encoding="utf-8")))
        with self._lock:
            return self._sessions.setdefault(session_id, session)

    def save(self, session: Session) -> None:
        path = self._path(session.session_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(session.to_json()), encoding="utf-8")
        tmp.replace(path)


# --------------------------------------------------------------------------
# Serialization of API views


def _session_view(session: Session) -> dict:
    cfg = session.config()
    meta = session.stream().meta
    cal = None
    if cfg.calibration is not None:
        cal = {
            "point_a": [cfg.calibration.point_a.x, cfg.calibration.point_a.y],
            "point_b": [cfg.calibration.point_b.x, cfg.calibration.point_b.y],
            "real_distance_m": cfg.calibration.real_distance,
            "scale_factor_m_per_px": cfg.calibration.scale_factor,
        }
    return {
        "session_id": session.session_id,
        "status": session.status,
        "frame_count": len(session.stream().frames),
        "width": meta.frame_width,
        "height": meta.frame_height,
        "fps": meta.fps,
        "calibration": cal,
        "config": session.config_data,
        "correction_count": len(session.corrections),
    }


def _trajectory_view(session: Session) -> dict:
    points = session.working_points()
    return {
        "session_id": session.session_id,
        "point_count": len(points),
        "points": [_point_to_json(p) for p in points],
    }


def _sample_view(s) -> dict:
    return {
        "from_frame": s.from_frame,
        "to_frame": s.to_frame,
        "speed_kmh": s.speed_kmh,
        "from": [s.from_point.x, s.from_point.y],
        "to": [s.to_point.x, s.to_point.y],
    }


def _report_view(session: Session, report: SpeedReport) -> dict:
    return {
        "session_id": session.session_id,
        "mode": report.measurement_point_mode.value,
        "peak": _sample_view(report.peak),
        "at_marker": None if report.at_marker is None else _sample_view(report.at_marker),
        "samples": [_sample_view(s) for s in report.samples],
    }


def _frame_view(session: Session, frame_index: int) -> dict:
    stream = session.stream()
    if not (0 <= frame_index < len(stream.frames)):
        raise ApiError(404, "not_found", f"frame {frame_index} outside stream")
    diag = None
    if session.has_trajectory():
        for d in session.diagnostics():
            if d.frame_index == frame_index:
                diag = d
                break
    if diag is None:
        candidates = [
            {
                "box": [det.box.x1, det.box.y1, det.box.x2, det.box.y2],
                "confidence": det.confidence,
                "accepted": None,
                "reason": None,
                "implied_speed_kmh": None,
                "proximity": None,
                "score": None,
                "selected": False,
            }
            for det in stream.frames[frame_index]
        ]
        return {"frame": frame_index, "prediction": None, "candidates": candidates}
    return {
        "frame": frame_index,
        "prediction": None if diag.predicted is None else [diag.predicted.x, diag.predicted.y],
        "candidates": [
            {
                "box": [
                    ev.detection.box.x1,
                    ev.detection.box.y1,
                    ev.detection.box.x2,
                    ev.detection.box.y2,
                ],
                "confidence": ev.detection.confidence,
                "accepted": ev.gate.accepted,
                "reason": None if ev.gate.reason is None else ev.gate.reason.value,
                "implied_speed_kmh": ev.gate.implied_speed_kmh,
                "proximity": ev.proximity,
                "score": ev.composite,
                "selected": ev.selected,
            }
            for ev in diag.candidates
        ],
    }


# --------------------------------------------------------------------------
# Idempotency


def _idempotent(session: Session, request_id: Optional[str], apply) -> dict:
    """Run a mutation once per request_id, replaying the stored response."""
    if request_id is not None:
        if not isinstance(request_id, str) or not request_id:
            raise ApiError(422, "validation", "request_id must be a non-empty string")
        hit = session.idempotency.get(request_id)
        if hit is not None:
            return hit
    response = apply()
    if request_id is not None:
        session.idempotency[request_id] = response
    return response


def _require_finite_pair(body: dict, keys: tuple[str, str]) -> tuple[float, float]:
    import math

    values = []
    for key in keys:
        value = body.get(key)
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise ApiError(422, "validation", f"{key} must be a finite number")
        values.append(float(value))
    return values[0], values[1]


# --------------------------------------------------------------------------
# App


def create_app(
    state_dir: Optional[str | Path] = None,
    default_config: Optional[PipelineConfig] = None,
) -> FastAPI:
    store = SessionStore(Path(state_dir) if state_dir else default_state_dir())
    default_config_data = (
        config_to_dict(default_config) if default_config is not None else None
    )
    app = FastAPI(title="shuttlespeed sessions", version="1.0")

    @app.exception_handler(ShuttleSpeedError)
    async def _domain_error(_request: Request, exc: ShuttleSpeedError):
        if isinstance(exc, ApiError):
            status, code = exc.status_code, exc.code
        elif isinstance(exc, CalibrationMissingError):
            status, code = 409, exc.code
        else:
            status, code = 422, exc.code
        return JSONResponse(status_code=status, content={"error": code, "message": str(exc)})

    @app.post(f"{API_PREFIX}/sessions", status_code=201)
    async def create_session(request: Request) -> JSONResponse:
        text = (await request.body()).decode("utf-8")
        if not text.strip():
            raise ApiError(422, "validation", "request body must be a detection stream")
        read_detection_stream(text)  # reject malformed uploads at the door
        session = store.create(text, config_data=default_config_data)
        return JSONResponse(status_code=201, content=_session_view(session))

    @app.get(API_PREFIX + "/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            return _session_view(session)

    @app.put(API_PREFIX + "/sessions/{session_id}/calibration")
    def set_calibration(session_id: str, body: dict) -> dict:
        session = store.get(session_id)
        with session.lock:

            def apply() -> dict:
                for key in ("point_a", "point_b", "real_distance_m"):
                    if key not in body:
                        raise ApiError(422, "validation", f"calibration needs {key!r}")
                overrides = {
                    "calibration": {
                        "point_a": body["point_a"],
                        "point_b": body["point_b"],
                        "real_distance_m": body["real_distance_m"],
                    }
                }
                merged = merge_config(session.config(), overrides)
                session.config_data = config_to_dict(merged)
                # The old trajectory was measured under the old scale.
                session.raw_points = []
                session.corrections = []
                session.status = "calibrated"
                session.invalidate_derived()
                return _session_view(session)

            response = _idempotent(session, body.get("request_id"), apply)
            store.save(session)
            return response

    @app.put(API_PREFIX + "/sessions/{session_id}/config")
    def set_config(session_id: str, body: dict) -> dict:
        session = store.get(session_id)
        with session.lock:

            def apply() -> dict:
                overrides = {k: v for k, v in body.items() if k != "request_id"}
                merged = merge_config(session.config(), overrides)
                session.config_data = config_to_dict(merged)
                session.raw_points = []
                session.corrections = []
                session.status = "calibrated" if merged.calibration is not None else "created"
                session.invalidate_derived()
                return _session_view(session)

            response = _idempotent(session, body.get("request_id"), apply)
            store.save(session)
            return response

    @app.post(API_PREFIX + "/sessions/{session_id}/track")
    def run_track(session_id: str, body: Optional[dict] = None) -> dict:
        session = store.get(session_id)
        body = body or {}
        with session.lock:

            def apply() -> dict:
                cfg = session.config()
                if cfg.calibration is None:
                    raise _conflict("session is not calibrated")
                run = run_tracking_with_diagnostics(session.stream(), cfg)
                session.raw_points = [_point_to_json(p) for p in run.trajectory.points]
                session.corrections = []
                session._diagnostics_cache = run.diagnostics
                session.status = "tracked"
                return _trajectory_view(session)

            response = _idempotent(session, body.get("request_id"), apply)
            store.save(session)
            return response

    @app.get(API_PREFIX + "/sessions/{session_id}/trajectory")
    def get_trajectory(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            if not session.has_trajectory():
                raise _conflict("session has no trajectory yet")
            return _trajectory_view(session)

    def _apply_correction(session: Session, entry: dict) -> None:
        session.corrections.append(entry)
        if session.status in ("tracked", "reported"):
            session.status = "verified"

    @app.patch(API_PREFIX + "/sessions/{session_id}/trajectory/{frame_index}")
    def patch_point(session_id: str, frame_index: int, body: dict) -> dict:
        session = store.get(session_id)
        with session.lock:
            if not session.has_trajectory():
                raise _conflict("cannot edit: session has no trajectory")

            def apply() -> dict:
                x, y = _require_finite_pair(body, ("x", "y"))
                meta = session.stream().meta
                if not (0 <= x <= meta.frame_width and 0 <= y <= meta.frame_height):
                    raise ApiError(422, "validation", "corrected point is outside the frame")
                current = {p.frame_index: p for p in session.working_points()}
                if frame_index not in current:
                    raise ApiError(
                        422, "validation", f"no trajectory point at frame {frame_index}"
                    )
                old = current[frame_index].position
                _apply_correction(
                    session,
                    {
                        "kind": "patch",
                        "frame": frame_index,
                        "old": [old.x, old.y],
                        "new": [x, y],
                        "timestamp": time.time(),
                    },
                )
                return _trajectory_view(session)

            response = _idempotent(session, body.get("request_id"), apply)
            store.save(session)
            return response

    @app.delete(API_PREFIX + "/sessions/{session_id}/trajectory/{frame_index}")
    def delete_point(
        session_id: str, frame_index: int, request_id: Optional[str] = None
    ) -> dict:
        session = store.get(session_id)
        with session.lock:
            if not session.has_trajectory():
                raise _conflict("cannot edit: session has no trajectory")

            def apply() -> dict:
                current = {p.frame_index: p for p in session.working_points()}
                if frame_index not in current:
                    raise ApiError(
                        422, "validation", f"no trajectory point at frame {frame_index}"
                    )
                old = current[frame_index].position
                _apply_correction(
                    session,
                    {
                        "kind": "delete",
                        "frame": frame_index,
                        "old": [old.x, old.y],
                        "new": None,
                        "timestamp": time.time(),
                    },
                )
                return _trajectory_view(session)

            response = _idempotent(session, request_id, apply)
            store.save(session)
            return response

    @app.get(API_PREFIX + "/sessions/{session_id}/report")
    def get_report(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            if not session.has_trajectory():
                raise _conflict("session has no trajectory to report on")
            report = session.report()
            if session.status in ("tracked", "verified"):
                session.status = "reported"
                store.save(session)
            return _report_view(session, report)

    @app.get(API_PREFIX + "/sessions/{session_id}/report/file")
    def get_report_file(session_id: str) -> PlainTextResponse:
        session = store.get(session_id)
        with session.lock:
            if not session.has_trajectory():
                raise _conflict("session has no trajectory to report on")
            report = session.report()
            if session.status in ("tracked", "verified"):
                session.status = "reported"
                store.save(session)
            return PlainTextResponse(write_speed_report(report))

    @app.get(API_PREFIX + "/sessions/{session_id}/trajectory/file")
    def get_trajectory_file(session_id: str) -> PlainTextResponse:
        session = store.get(session_id)
        with session.lock:
            if not session.has_trajectory():
                raise _conflict("session has no trajectory yet")
            return PlainTextResponse(
                write_trajectory(session.working_points(), session.stream().meta)
            )

    @app.get(API_PREFIX + "/sessions/{session_id}/frames/{frame_index}")
    def get_frame(session_id: str, frame_index: int) -> dict:
        session = store.get(session_id)
        with session.lock:
            return _frame_view(session, frame_index)

    @app.get(API_PREFIX + "/sessions/{session_id}/corrections")
    def get_corrections(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            return {
                "session_id": session.session_id,
                "corrections": list(session.corrections),
            }

    return app
