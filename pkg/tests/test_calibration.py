import pytest

from shuttlespeed.calibration import (
    NetMarker,
    TravelSide,
    VideoMeta,
    compute_scale,
    kmh_per_pixel_step,
)
from shuttlespeed.errors import DegenerateCalibrationError, InputContractError
from shuttlespeed.geometry import PixelPoint


def test_scale_from_horizontal_line():
    cal = compute_scale(PixelPoint(0, 0), PixelPoint(600, 0), 3.0)
    assert cal.pixel_distance == 600.0
    assert cal.scale_factor == 0.005


def test_scale_from_diagonal_line():
    # 3-4-5 triangle: 300/400 legs span 500 px
    cal = compute_scale(PixelPoint(0, 0), PixelPoint(300, 400), 1.0)
    assert cal.pixel_distance == 500.0
    assert cal.scale_factor == 0.002


def test_coincident_points_are_degenerate():
    with pytest.raises(DegenerateCalibrationError):
        compute_scale(PixelPoint(100, 100), PixelPoint(100, 100), 1.0)


def test_non_positive_distance_rejected():
    with pytest.raises(InputContractError):
        compute_scale(PixelPoint(0, 0), PixelPoint(1, 0), 0.0)
    with pytest.raises(InputContractError):
        compute_scale(PixelPoint(0, 0), PixelPoint(1, 0), -2.0)


def test_scale_invariant_to_point_order():
    a, b = PixelPoint(12, 34), PixelPoint(250, 90)
    assert compute_scale(a, b, 4.2).scale_factor == compute_scale(b, a, 4.2).scale_factor


def test_kmh_per_pixel_step_values():
    meta30 = VideoMeta(1920, 1080, 30.0)
    meta60 = VideoMeta(1920, 1080, 60.0)
    meta25 = VideoMeta(1920, 1080, 25.0)
    cal_005 = compute_scale(PixelPoint(0, 0), PixelPoint(600, 0), 3.0)  # 0.005 m/px
    cal_002 = compute_scale(PixelPoint(0, 0), PixelPoint(300, 400), 1.0)  # 0.002 m/px
    cal_001 = compute_scale(PixelPoint(0, 0), PixelPoint(100, 0), 1.0)  # 0.01 m/px
    assert kmh_per_pixel_step(cal_005, meta30) == pytest.approx(0.54)
    assert kmh_per_pixel_step(cal_002, meta60) == pytest.approx(0.432)
    assert kmh_per_pixel_step(cal_001, meta25) == pytest.approx(0.9)


def test_scaling_points_by_k_divides_scale_factor():
    base = compute_scale(PixelPoint(10, 20), PixelPoint(400, 310), 5.0)
    for k in (0.5, 2.0, 3.7):
        scaled = compute_scale(
            PixelPoint(10 * k, 20 * k), PixelPoint(400 * k, 310 * k), 5.0
        )
        assert scaled.pixel_distance == pytest.approx(base.pixel_distance * k)
        assert scaled.scale_factor == pytest.approx(base.scale_factor / k)


def test_video_meta_frame_time():
    meta = VideoMeta(1920, 1080, 30.0)
    assert meta.frame_time * meta.fps == pytest.approx(1.0)


def test_video_meta_validation():
    with pytest.raises(InputContractError):
        VideoMeta(0, 1080, 30.0)
    with pytest.raises(InputContractError):
        VideoMeta(1920, -1, 30.0)
    with pytest.raises(InputContractError):
        VideoMeta(1920, 1080, 0.0)


def test_net_marker():
    marker = NetMarker(marker_x=1020.0, side=TravelSide.LEFT_TO_RIGHT)
    assert marker.marker_x == 1020.0
    with pytest.raises(InputContractError):
        NetMarker(marker_x=-1.0, side=TravelSide.LEFT_TO_RIGHT)
    with pytest.raises(InputContractError):
        NetMarker(marker_x=float("nan"), side=TravelSide.RIGHT_TO_LEFT)
