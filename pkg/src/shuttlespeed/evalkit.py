"""Error metrics between paired speed series, and harnesses that measure
the pipeline against bundled radar trials and simulated flights.

The bundled 20-trial radar comparison ships as fixture data; aggregate
metrics are always recomputed from the rows rather than hard-coded.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .calibration import VideoMeta
from .config import PipelineConfig
from .errors import InputContractError
from .formats import read_radar_comparison, write_detection_stream
from .pipeline import run_stream
from .simulator import (
    CorruptionParams,
    GroundTruthFlight,
    corrupt,
    ground_truth_peak_kmh,
)

RADAR_TRIALS_RESOURCE = "radar_trials.jsonl"


@dataclass(frozen=True)
class PairedSpeeds:
    """Per-trial (label, reference, candidate) speed pairs, both in km/h."""

    trials: list[tuple[str, float, float]]

    def __post_init__(self) -> None:
        if not self.trials:
            raise InputContractError("paired speeds need at least one trial")
        for label, ref, cand in self.trials:
            if ref < 0 or cand < 0:
                raise InputContractError(f"trial {label!r} has a negative speed")

    @property
    def reference_kmh(self) -> np.ndarray:
        return np.array([t[1] for t in self.trials], dtype=float)

    @property
    def candidate_kmh(self) -> np.ndarray:
        return np.array([t[2] for t in self.trials], dtype=float)


@dataclass(frozen=True)
class ErrorSummary:
    mae_kmh: float
    rmse_kmh: float
    mean_signed_error_kmh: float
    n: int


def error_summary(pairs: PairedSpeeds) -> ErrorSummary:
    """MAE / RMSE / mean signed error of candidate minus reference."""
    diff = pairs.candidate_kmh - pairs.reference_kmh
    return ErrorSummary(
        mae_kmh=float(np.mean(np.abs(diff))),
        rmse_kmh=float(np.sqrt(np.mean(diff**2))),
        mean_signed_error_kmh=float(np.mean(diff)),
        n=len(pairs.trials),
    )


def load_radar_trials() -> list[dict]:
    """The bundled radar-vs-video comparison: 20 smash trials, three columns."""
    text = resources.files("shuttlespeed.data").joinpath(RADAR_TRIALS_RESOURCE).read_text("utf-8")
    return read_radar_comparison(text)


@dataclass(frozen=True)
class RadarTrialMetrics:
    peak_vs_radar: ErrorSummary
    at_net_vs_radar: ErrorSummary


def radar_trial_metrics(trials: list[dict] | None = None) -> RadarTrialMetrics:
    """Recompute the aggregate error metrics from the trial rows."""
    rows = load_radar_trials() if trials is None else trials
    peak_pairs = PairedSpeeds(
        [(str(r["trial"]), r["radar_kmh"], r["peak_kmh"]) for r in rows]
    )
    net_pairs = PairedSpeeds(
        [(str(r["trial"]), r["radar_kmh"], r["at_net_kmh"]) for r in rows]
    )
    return RadarTrialMetrics(
        peak_vs_radar=error_summary(peak_pairs),
        at_net_vs_radar=error_summary(net_pairs),
    )


def end_to_end_accuracy(
    flight: GroundTruthFlight,
    meta: VideoMeta,
    corruption: CorruptionParams,
    config: PipelineConfig,
) -> float:
    """Relative error of the pipeline's peak speed on a corrupted stream.

    The reference is the flight's own peak frame-interval speed — the
    fastest chord between consecutive frame samples — because that is the
    quantity a frame-differencing pipeline can observe. Comparing against
    the instantaneous launch speed instead would fold the frame-rate
    discretization bias into the pipeline's score.
    """
    stream = corrupt(flight, meta, corruption)
    text = write_detection_stream(stream.meta, stream.frames, source="simulated")
    result = run_stream(text, config)
    truth = ground_truth_peak_kmh(flight)
    return abs(result.report.peak.speed_kmh - truth) / truth
