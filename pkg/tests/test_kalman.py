import math

import numpy as np
import pytest

from shuttlespeed.errors import InputContractError
from shuttlespeed.geometry import PixelPoint
from shuttlespeed.kalman import (
    KalmanConfig,
    KalmanState,
    kalman_init,
    kalman_predict,
    kalman_update,
)

CFG = KalmanConfig()


def test_init_contract():
    state = kalman_init(PixelPoint(100, 200), CFG)
    assert state.position == PixelPoint(100, 200)
    assert state.velocity == (0.0, 0.0)
    expected_diag = [
        CFG.initial_position_variance,
        CFG.initial_position_variance,
        CFG.initial_velocity_variance,
        CFG.initial_velocity_variance,
    ]
    assert np.array_equal(np.diag(state.covariance), expected_diag)
    assert np.array_equal(state.covariance, np.diag(expected_diag))


def test_init_deterministic():
    a = kalman_init(PixelPoint(3.5, -7.25), CFG)
    b = kalman_init(PixelPoint(3.5, -7.25), CFG)
    assert a.mean().tolist() == b.mean().tolist()
    assert np.array_equal(a.covariance, b.covariance)


def test_config_requires_positive_values():
    with pytest.raises(InputContractError):
        KalmanConfig(process_noise_scale=0.0)
    with pytest.raises(InputContractError):
        KalmanConfig(measurement_noise=-1.0)


def test_predict_advances_position_by_velocity():
    synthetic = KalmanState(
        position=PixelPoint(0.0, 0.0), velocity=(30.0, 0.0), covariance=np.eye(4)
    )
    predicted = kalman_predict(synthetic, CFG)
    assert predicted.position == PixelPoint(30.0, 0.0)
    assert predicted.velocity == (30.0, 0.0)


def test_update_pulls_toward_measurement():
    state = kalman_init(PixelPoint(0, 0), CFG)
    moved = kalman_update(kalman_predict(state, CFG), PixelPoint(30, 0), CFG)
    assert 0 < moved.position.x < 30
    assert moved.position.y == pytest.approx(0.0)


def test_predict_stationary_fixed_point():
    state = kalman_init(PixelPoint(42, 17), CFG)
    predicted = kalman_predict(state, CFG)
    assert predicted.position == PixelPoint(42, 17)


def test_predict_increases_covariance_trace():
    state = kalman_init(PixelPoint(0, 0), CFG)
    predicted = kalman_predict(state, CFG)
    assert np.trace(predicted.covariance) > np.trace(state.covariance)


def test_update_zero_innovation_keeps_position():
    state = kalman_predict(kalman_init(PixelPoint(10, 20), CFG), CFG)
    updated = kalman_update(state, state.position, CFG)
    assert updated.position.x == pytest.approx(state.position.x)
    assert updated.position.y == pytest.approx(state.position.y)


def test_update_perfect_measurement_limit():
    cfg = KalmanConfig(measurement_noise=1e-12)
    state = kalman_predict(kalman_init(PixelPoint(0, 0), cfg), cfg)
    updated = kalman_update(state, PixelPoint(50, 80), cfg)
    assert updated.position.x == pytest.approx(50.0, abs=1e-6)
    assert updated.position.y == pytest.approx(80.0, abs=1e-6)


def test_update_uninformative_measurement_limit():
    cfg = KalmanConfig(measurement_noise=1e12)
    state = kalman_predict(kalman_init(PixelPoint(0, 0), cfg), cfg)
    updated = kalman_update(state, PixelPoint(50, 80), cfg)
    assert updated.position.x == pytest.approx(0.0, abs=1e-6)
    assert updated.position.y == pytest.approx(0.0, abs=1e-6)


def test_update_trace_does_not_increase():
    state = kalman_predict(kalman_init(PixelPoint(0, 0), CFG), CFG)
    updated = kalman_update(state, PixelPoint(12, -5), CFG)
    assert np.trace(updated.covariance) <= np.trace(state.covariance) + 1e-12


def test_update_rejects_non_finite_measurement():
    state = kalman_predict(kalman_init(PixelPoint(0, 0), CFG), CFG)
    bad = PixelPoint.__new__(PixelPoint)  # sidestep constructor validation
    object.__setattr__(bad, "x", float("nan"))
    object.__setattr__(bad, "y", 0.0)
    with pytest.raises(InputContractError):
        kalman_update(state, bad, CFG)


def test_posterior_lies_on_prediction_measurement_segment():
    # The x/y axes are decoupled with identical noise, so the position gain
    # is a scalar and the posterior sits between prediction and measurement.
    rng = np.random.default_rng(7)
    for _ in range(50):
        state = kalman_init(PixelPoint(*rng.uniform(0, 1000, 2)), CFG)
        for _ in range(10):
            predicted = kalman_predict(state, CFG)
            z = PixelPoint(
                predicted.position.x + rng.normal(0, 30),
                predicted.position.y + rng.normal(0, 30),
            )
            posterior = kalman_update(predicted, z, CFG)
            dz = (z.x - predicted.position.x, z.y - predicted.position.y)
            dp = (
                posterior.position.x - predicted.position.x,
                posterior.position.y - predicted.position.y,
            )
            n2 = dz[0] ** 2 + dz[1] ** 2
            if n2 > 0:
                alpha = (dp[0] * dz[0] + dp[1] * dz[1]) / n2
                off_segment = math.hypot(dp[0] - alpha * dz[0], dp[1] - alpha * dz[1])
                assert off_segment < 1e-9
                assert -1e-9 <= alpha <= 1.0 + 1e-9
            state = posterior


def test_convergence_on_constant_velocity_track():
    # Noiseless measurements from a straight track: prediction error must
    # fall below 0.5 px within 10 frames (measured: below by frame 2).
    start = PixelPoint(50.0, 80.0)
    velocity = (12.0, 7.0)
    state = kalman_init(start, CFG)
    converged_at = None
    for k in range(1, 11):
        true = PixelPoint(start.x + velocity[0] * k, start.y + velocity[1] * k)
        predicted = kalman_predict(state, CFG)
        if converged_at is None and predicted.position.distance_to(true) < 0.5:
            converged_at = k
        state = kalman_update(predicted, true, CFG)
    assert converged_at is not None and converged_at <= 10


def psd_residuals(cov):
    sym = np.max(np.abs(cov - cov.T))
    min_eig = np.min(np.linalg.eigvalsh((cov + cov.T) / 2.0))
    return sym, min_eig


def test_covariance_stays_symmetric_psd_under_random_steps():
    rng = np.random.default_rng(2024)
    state = kalman_init(PixelPoint(500, 500), CFG)
    for _ in range(1000):
        state = kalman_predict(state, CFG)
        if rng.random() < 0.7:
            z = PixelPoint(
                state.position.x + rng.normal(0, 40),
                state.position.y + rng.normal(0, 40),
            )
            state = kalman_update(state, z, CFG)
        sym, min_eig = psd_residuals(state.covariance)
        assert sym < 1e-9
        assert min_eig >= -1e-9
