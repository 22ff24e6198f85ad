"""Shared fixtures: the standard simulated smash and the bundled demo files.

The corruption seeds and thresholds used here were pinned from oracle runs
when the fixtures were created; see the per-test comments for the frozen
values they produced.
"""

from __future__ import annotations

import json
from importlib import resources

import pytest

from shuttlespeed.calibration import VideoMeta
from shuttlespeed.config import PipelineConfig, config_from_dict
from shuttlespeed.formats import write_detection_stream
from shuttlespeed.geometry import PixelPoint
from shuttlespeed.simulator import (
    CorruptionParams,
    FlightParams,
    FrameProjection,
    GroundTruthFlight,
    corrupt,
    simulate_flight,
)

# Standard fixture: a 60 m/s smash launched 10 degrees below horizontal from
# 3 m, filmed at 1920x1080 @ 30 fps with 120 px/m. The whole flight stays in
# frame (x in [60, 1487], y in [140, 709]).
STD_META = VideoMeta(frame_width=1920.0, frame_height=1080.0, fps=30.0)
STD_PROJECTION = FrameProjection(pixels_per_meter=120.0, origin=PixelPoint(60.0, 500.0))
STD_FLIGHT_PARAMS = FlightParams(
    launch_speed=60.0,
    launch_angle_deg=10.0,
    launch_height=3.0,
    terminal_speed=6.8,
    duration=1.0,
)
# 600 px spanning 5 m on the motion plane: scale factor 1/120 m/px, so one
# pixel per frame is 0.9 km/h.
STD_CALIBRATION = {"point_a": [60.0, 500.0], "point_b": [660.0, 500.0], "real_distance_m": 5.0}

# Frozen from the integrator: max frame-interval chord speed of the standard
# flight. This is what a 30 fps pipeline can at best observe (the
# instantaneous launch speed is 216 km/h; drag removes ~17% within the first
# frame interval).
ORACLE_PEAK_KMH = 180.13143989673063

# Pinned corruption fixtures (relative peak errors measured at creation):
# noiseless 0.628%, noisy 0.908% (frames 6 and 20 dropped and coasted).
NOISELESS = CorruptionParams(
    pixel_noise_sigma=0.0, dropout_probability=0.0, clutter_rate=0.0, rng_seed=0
)
NOISY = CorruptionParams(
    pixel_noise_sigma=2.0, dropout_probability=0.1, clutter_rate=3.0, rng_seed=20
)
# One persistent static site + Poisson(2) transient clutter per frame; the
# static site wins the seeding frame and is gated on every later one.
CLUTTERED = CorruptionParams(
    pixel_noise_sigma=2.0,
    dropout_probability=0.2,
    clutter_rate=3.0,
    clutter_static_fraction=1.0 / 3.0,
    rng_seed=126,
)
# Plain 20% dropout + transient clutter: 28 of 29 detected points match the
# truth identity (96.6%).
DROPOUT = CorruptionParams(
    pixel_noise_sigma=2.0, dropout_probability=0.2, clutter_rate=3.0, rng_seed=65
)


def load_demo(name: str) -> str:
    return (resources.files("shuttlespeed.data") / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def std_flight() -> GroundTruthFlight:
    return simulate_flight(STD_FLIGHT_PARAMS, STD_PROJECTION, STD_META)


@pytest.fixture(scope="session")
def std_config() -> PipelineConfig:
    return config_from_dict({"calibration": dict(STD_CALIBRATION)})


def stream_text_for(flight: GroundTruthFlight, cp: CorruptionParams) -> str:
    stream = corrupt(flight, STD_META, cp)
    return write_detection_stream(STD_META, stream.frames, source="simulated")


@pytest.fixture(scope="session")
def noiseless_text(std_flight) -> str:
    return stream_text_for(std_flight, NOISELESS)


@pytest.fixture(scope="session")
def noisy_text(std_flight) -> str:
    return stream_text_for(std_flight, NOISY)


@pytest.fixture(scope="session")
def demo_stream_text() -> str:
    return load_demo("demo_stream.jsonl")


@pytest.fixture(scope="session")
def demo_config_data() -> dict:
    return json.loads(load_demo("demo_config.json"))


@pytest.fixture(scope="session")
def demo_config(demo_config_data) -> PipelineConfig:
    return config_from_dict(demo_config_data)
