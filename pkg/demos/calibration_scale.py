"""What the two-point calibration buys you, and what it costs when sloppy.

The operator clicks two points with a known real separation (court lines
work well). Everything downstream is a multiple of the derived scale
factor, so a 2% error in the clicked distance is a 2% error in every
reported speed.

Run:
    python3 demos/calibration_scale.py
"""

from __future__ import annotations

from shuttlespeed.calibration import VideoMeta, compute_scale, kmh_per_pixel_step
from shuttlespeed.geometry import PixelPoint

# A doubles service court is 6.10 m wide; suppose it spans 732 px on screen.
POINT_A = PixelPoint(594.0, 417.0)
POINT_B = PixelPoint(1326.0, 417.0)
COURT_WIDTH_M = 6.10

cal = compute_scale(POINT_A, POINT_B, COURT_WIDTH_M)
print(f"pixel distance : {cal.pixel_distance:.1f} px")
print(f"scale factor   : {cal.scale_factor * 1000:.3f} mm/px")

print("\none pixel of motion per frame means:")
for fps in (25.0, 30.0, 60.0, 120.0, 240.0):
    meta = VideoMeta(1920.0, 1080.0, fps)
    print(f"  {fps:6.0f} fps -> {kmh_per_pixel_step(cal, meta):6.2f} km/h")

# A 300 km/h smash at 30 fps crosses this frame in about 3 frames; the
# per-frame displacement is what the tracker's gate reasons about.
meta = VideoMeta(1920.0, 1080.0, 30.0)
step = kmh_per_pixel_step(cal, meta)
print(f"\na 300 km/h smash moves {300.0 / step:.0f} px per frame at 30 fps")

print("\ncalibration error propagates linearly:")
for err_px in (0.0, 5.0, 15.0, 30.0):
    wrong = compute_scale(POINT_A, PixelPoint(POINT_B.x - err_px, POINT_B.y), COURT_WIDTH_M)
    speed = 300.0 * wrong.scale_factor / cal.scale_factor
    print(f"  clicked {err_px:4.0f} px short -> true 300.0 km/h reads {speed:6.1f} km/h")
