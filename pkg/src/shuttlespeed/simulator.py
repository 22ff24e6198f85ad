"""Synthetic shuttlecock flights and detector-like corruption of them.

The flight model is a point mass under gravity plus quadratic aerodynamic
drag, parameterized by terminal speed: acceleration = g + drag with
drag = -(g / v_t^2) * |v| * v, so a steady vertical fall settles at v_t.
Integration is fixed-step RK4 for reproducibility. The corruptor turns a
projected flight into per-frame detection lists with truth labels, which
makes the module the independent oracle for end-to-end pipeline checks.

Randomness comes from numpy's PCG64 generator seeded explicitly; the draw
order per frame is fixed (documented in corrupt()), so a given seed yields
an identical stream on every run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calibration import VideoMeta
from .errors import InputContractError
from .geometry import BoundingBox, Detection, PixelPoint

TRUE_LABEL = "true"
CLUTTER_LABEL = "clutter"


@dataclass(frozen=True)
class FlightParams:
    launch_speed: float  # m/s
    launch_angle_deg: float  # below horizontal; positive = downward smash
    launch_height: float  # meters above the ground plane
    terminal_speed: float = 6.8  # m/s
    gravity: float = 9.81  # m/s^2
    duration: float = 1.0  # seconds
    integration_step: float = 1e-4  # seconds

    def __post_init__(self):
        if self.launch_speed <= 0:
            raise InputContractError("launch_speed must be positive")
        if self.terminal_speed <= 0:
            raise InputContractError("terminal_speed must be positive")
        if self.integration_step <= 0 or self.duration <= 0:
            raise InputContractError("duration and integration_step must be positive")


@dataclass(frozen=True)
class FrameProjection:
    """Single scale + offset mapping the 2D world plane to pixels.

    World x runs along the smash direction, world y points up; pixel y
    points down, so the projection flips it.
    """

    pixels_per_meter: float
    origin: PixelPoint  # pixel position of world (0, 0)

    def __post_init__(self):
        if self.pixels_per_meter <= 0:
            raise InputContractError("pixels_per_meter must be positive")

    def to_pixel(self, x: float, y: float) -> PixelPoint:
        return PixelPoint(
            self.origin.x + self.pixels_per_meter * x,
            self.origin.y - self.pixels_per_meter * y,
        )


@dataclass(frozen=True)
class FrameSample:
    """Ground-truth state at one video frame time."""

    frame_index: int
    t: float
    pixel: PixelPoint
    world_position: tuple[float, float]
    world_velocity: tuple[float, float]
    speed_mps: float
    pixel_velocity: tuple[float, float]  # pixels/frame, pixel-axis convention


@dataclass(frozen=True, eq=False)
class GroundTruthFlight:
    params: FlightParams
    projection: FrameProjection
    t: np.ndarray  # integration sample times
    position: np.ndarray  # (N, 2) world meters
    velocity: np.ndarray  # (N, 2) world m/s
    speed: np.ndarray  # (N,) m/s
    frame_samples: list[FrameSample]


def _derivative(state, gravity, drag_coeff):
    x, y, vx, vy = state
    v = math.hypot(vx, vy)
    ax = -drag_coeff * v * vx
    ay = -gravity - drag_coeff * v * vy
    return (vx, vy, ax, ay)


def _rk4_step(state, h, gravity, drag_coeff):
    k1 = _derivative(state, gravity, drag_coeff)
    s2 = tuple(s + 0.5 * h * k for s, k in zip(state, k1))
    k2 = _derivative(s2, gravity, drag_coeff)
    s3 = tuple(s + 0.5 * h * k for s, k in zip(state, k2))
    k3 = _derivative(s3, gravity, drag_coeff)
    s4 = tuple(s + h * k for s, k in zip(state, k3))
    k4 = _derivative(s4, gravity, drag_coeff)
    return tuple(
        s + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
        for s, a, b, c, d in zip(state, k1, k2, k3, k4)
    )


def simulate_flight(
    params: FlightParams,
    projection: FrameProjection,
    meta: VideoMeta,
) -> GroundTruthFlight:
    """Integrate a flight and sample it at every video frame time.

    Frame samples are linearly interpolated between integration steps; at
    the default step of 1e-4 s the interpolation error is far below any
    tolerance used downstream.
    """
    angle = math.radians(params.launch_angle_deg)
    state = (
        0.0,
        params.launch_height,
        params.launch_speed * math.cos(angle),
        -params.launch_speed * math.sin(angle),
    )
    drag_coeff = params.gravity / (params.terminal_speed**2)
    h = params.integration_step
    n_steps = int(round(params.duration / h))

    times = np.empty(n_steps + 1)
    pos = np.empty((n_steps + 1, 2))
    vel = np.empty((n_steps + 1, 2))
    times[0] = 0.0
    pos[0] = state[:2]
    vel[0] = state[2:]
    for i in range(1, n_steps + 1):
        state = _rk4_step(state, h, params.gravity, drag_coeff)
        times[i] = i * h
        pos[i] = state[:2]
        vel[i] = state[2:]
    speed = np.hypot(vel[:, 0], vel[:, 1])

    frame_samples = []
    frame_time = meta.frame_time
    n_frames = int(math.floor(params.duration / frame_time)) + 1
    ppm = projection.pixels_per_meter
    for k in range(n_frames):
        t = k * frame_time
        # Bracketing integration samples; exact hit at fixture boundaries.
        j = min(int(t / h), n_steps - 1) if n_steps > 0 else 0
        frac = (t - times[j]) / h if n_steps > 0 else 0.0
        p = pos[j] + frac * (pos[j + 1] - pos[j])
        v = vel[j] + frac * (vel[j + 1] - vel[j])
        frame_samples.append(
            FrameSample(
                frame_index=k,
                t=t,
                pixel=projection.to_pixel(p[0], p[1]),
                world_position=(float(p[0]), float(p[1])),
                world_velocity=(float(v[0]), float(v[1])),
                speed_mps=float(math.hypot(v[0], v[1])),
                pixel_velocity=(
                    float(v[0] * ppm / meta.fps),
                    float(-v[1] * ppm / meta.fps),
                ),
            )
        )

    return GroundTruthFlight(
        params=params,
        projection=projection,
        t=times,
        position=pos,
        velocity=vel,
        speed=speed,
        frame_samples=frame_samples,
    )


def frame_chord_speeds_kmh(flight: GroundTruthFlight) -> np.ndarray:
    """Per-frame-interval average speeds (km/h) of the exact flight.

    This is what a perfect frame-sampled kinematic measurement would
    report, and thus the reference for pipeline peak-speed checks.
    """
    pts = np.array([s.world_position for s in flight.frame_samples])
    if len(pts) < 2:
        return np.empty(0)
    chords = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    dt = flight.frame_samples[1].t - flight.frame_samples[0].t
    return chords / dt * 3.6


def ground_truth_peak_kmh(flight: GroundTruthFlight) -> float:
    """Peak frame-interval speed of the exact flight, in km/h."""
    speeds = frame_chord_speeds_kmh(flight)
    if speeds.size == 0:
        raise InputContractError("flight has fewer than 2 frame samples")
    return float(speeds.max())


@dataclass(frozen=True)
class ConfidenceModel:
    true_mean: float = 0.55
    true_sigma: float = 0.15
    clutter_mean: float = 0.35
    clutter_sigma: float = 0.15
    static_mean: float = 0.9
    static_sigma: float = 0.05


@dataclass(frozen=True)
class CorruptionParams:
    pixel_noise_sigma: float = 2.0
    dropout_probability: float = 0.1
    clutter_rate: float = 3.0  # expected clutter boxes per frame
    clutter_static_fraction: float = 0.0
    blur_elongation_gain: float = 0.5  # trailing smear pixels per (pixel/frame)
    base_box_size: float = 24.0
    confidence_model: ConfidenceModel = field(default_factory=ConfidenceModel)
    rng_seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.dropout_probability <= 1.0):
            raise InputContractError("dropout_probability must be in [0, 1]")
        if not (0.0 <= self.clutter_static_fraction <= 1.0):
            raise InputContractError("clutter_static_fraction must be in [0, 1]")
        if self.pixel_noise_sigma < 0 or self.clutter_rate < 0:
            raise InputContractError("sigmas and rates must be >= 0")
        if self.base_box_size <= 0:
            raise InputContractError("base_box_size must be positive")


@dataclass(frozen=True)
class CorruptedStream:
    """Detector-like per-frame detections plus truth labels.

    labels[i] is the label of the i-th emitted detection in file order
    (frames ascending, emission order within a frame).
    """

    meta: VideoMeta
    frames: list[list[Detection]]
    labels: list[str]
    true_box_by_frame: dict[int, BoundingBox]

    def all_detections(self) -> list[Detection]:
        return [d for frame in self.frames for d in frame]


def _clip_box(x1, y1, x2, y2, meta: VideoMeta) -> Optional[tuple[float, float, float, float]]:
    x1, x2 = max(x1, 0.0), min(x2, meta.frame_width)
    y1, y2 = max(y1, 0.0), min(y2, meta.frame_height)
    if x1 >= x2 or y1 >= y2:
        return None
    return x1, y1, x2, y2


def corrupt(flight: GroundTruthFlight, meta: VideoMeta, cp: CorruptionParams) -> CorruptedStream:
    """Turn an exact flight into a noisy, labeled detection stream.

    Per frame, the RNG is consumed in a fixed order:
      1. one uniform for the dropout decision;
      2. if the true detection is emitted: two normals for pixel noise,
         one normal for its confidence;
      3. one normal per persistent static site for its confidence;
      4. one Poisson count for transient clutter, then per box two
         uniforms for position and one normal for confidence.
    Static sites are chosen up front (two uniforms each) and re-emitted
    every frame at the same spot, mimicking a static false positive such
    as a court marking.
    """
    rng = np.random.Generator(np.random.PCG64(cp.rng_seed))
    model = cp.confidence_model
    half = cp.base_box_size / 2.0
    margin = cp.base_box_size  # keep generated clutter inside the frame

    n_static = int(round(cp.clutter_rate * cp.clutter_static_fraction))
    transient_rate = max(cp.clutter_rate - n_static, 0.0)
    static_sites = [
        (
            rng.uniform(margin, meta.frame_width - margin),
            rng.uniform(margin, meta.frame_height - margin),
        )
        for _ in range(n_static)
    ]

    frames: list[list[Detection]] = []
    labels: list[str] = []
    true_box_by_frame: dict[int, BoundingBox] = {}

    for sample in flight.frame_samples:
        frame: list[Detection] = []
        k = sample.frame_index

        emit_true = rng.random() >= cp.dropout_probability
        if emit_true:
            noise = rng.normal(0.0, cp.pixel_noise_sigma, 2)
            conf = float(np.clip(rng.normal(model.true_mean, model.true_sigma), 0.0, 1.0))
            cx = sample.pixel.x + float(noise[0])
            cy = sample.pixel.y + float(noise[1])
            vx, vy = sample.pixel_velocity
            pixel_speed = math.hypot(vx, vy)
            if pixel_speed > 0:
                ux, uy = vx / pixel_speed, vy / pixel_speed
            else:
                ux, uy = 0.0, 0.0
            # Motion smear trails the instantaneous position (frame time is
            # shutter close), so the box stretches backward along the travel
            # direction and its leading edge stays on the object.
            smear = cp.blur_elongation_gain * pixel_speed
            clipped = _clip_box(
                min(cx, cx - smear * ux) - half,
                min(cy, cy - smear * uy) - half,
                max(cx, cx - smear * ux) + half,
                max(cy, cy - smear * uy) + half,
                meta,
            )
            if clipped is not None:
                box = BoundingBox(*clipped)
                frame.append(Detection(k, box, conf))
                labels.append(TRUE_LABEL)
                true_box_by_frame[k] = box

        for sx, sy in static_sites:
            conf = float(np.clip(rng.normal(model.static_mean, model.static_sigma), 0.0, 1.0))
            clipped = _clip_box(sx - half, sy - half, sx + half, sy + half, meta)
            if clipped is not None:
                frame.append(Detection(k, BoundingBox(*clipped), conf))
                labels.append(CLUTTER_LABEL)

        n_clutter = int(rng.poisson(transient_rate)) if transient_rate > 0 else 0
        for _ in range(n_clutter):
            cx = rng.uniform(margin, meta.frame_width - margin)
            cy = rng.uniform(margin, meta.frame_height - margin)
            conf = float(np.clip(rng.normal(model.clutter_mean, model.clutter_sigma), 0.0, 1.0))
            clipped = _clip_box(cx - half, cy - half, cx + half, cy + half, meta)
            if clipped is not None:
                frame.append(Detection(k, BoundingBox(*clipped), conf))
                labels.append(CLUTTER_LABEL)

        frames.append(frame)

    return CorruptedStream(
        meta=meta, frames=frames, labels=labels, true_box_by_frame=true_box_by_frame
    )
