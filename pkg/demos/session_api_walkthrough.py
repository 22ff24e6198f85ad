"""Walk the session HTTP API through a full review: upload, calibrate,
track, correct one point, and pull the refreshed report.

Uses fastapi's in-process test client, so nothing needs to be listening.
For a real server: shuttlespeed serve --port 8000

Run:
    python3 demos/session_api_walkthrough.py
"""

from __future__ import annotations

import tempfile
from importlib import resources

from fastapi.testclient import TestClient

from shuttlespeed.service import create_app

stream_text = (resources.files("shuttlespeed.data") / "demo_stream.jsonl").read_text(
    encoding="utf-8"
)

client = TestClient(create_app(state_dir=tempfile.mkdtemp(prefix="shuttlespeed-demo-")))

# 1. Upload the detection stream.
session = client.post("/v1/sessions", content=stream_text).json()
sid = session["session_id"]
print(f"session {sid[:8]}...  status={session['status']}  "
      f"{session['frame_count']} frames @ {session['fps']:.0f} fps")

# 2. Calibrate: two points on the court, 5 m apart.
session = client.put(f"/v1/sessions/{sid}/calibration", json={
    "point_a": [60.0, 500.0], "point_b": [660.0, 500.0], "real_distance_m": 5.0,
}).json()
print(f"calibrated: {session['calibration']['scale_factor_m_per_px'] * 1000:.3f} mm/px  "
      f"status={session['status']}")

# 3. Track.
trajectory = client.post(f"/v1/sessions/{sid}/track").json()
print(f"tracked {trajectory['point_count']} points")

# Peek at how frame 1 was decided.
frame = client.get(f"/v1/sessions/{sid}/frames/1").json()
for c in frame["candidates"]:
    mark = "*" if c["selected"] else " "
    print(f"  {mark} conf={c['confidence']:.2f} accepted={c['accepted']} "
          f"implied={c['implied_speed_kmh'] and round(c['implied_speed_kmh'], 1)} km/h "
          f"score={c['score'] and round(c['score'], 3)}")

# 4. First report.
report = client.get(f"/v1/sessions/{sid}/report").json()
print(f"\npeak: {report['peak']['speed_kmh']:.2f} km/h "
      f"(frames {report['peak']['from_frame']}->{report['peak']['to_frame']})")

# 5. The reviewer distrusts the first point and deletes it. The request_id
# makes the edit idempotent: replaying it (a retry, a double click) is a
# no-op rather than a second correction.
client.delete(f"/v1/sessions/{sid}/trajectory/0", params={"request_id": "review-1"})
client.delete(f"/v1/sessions/{sid}/trajectory/0", params={"request_id": "review-1"})
log = client.get(f"/v1/sessions/{sid}/corrections").json()["corrections"]
print(f"\ndeleted frame 0 (replayed twice, {len(log)} correction logged)")

report = client.get(f"/v1/sessions/{sid}/report").json()
print(f"refreshed peak: {report['peak']['speed_kmh']:.2f} km/h "
      f"(frames {report['peak']['from_frame']}->{report['peak']['to_frame']})")

session = client.get(f"/v1/sessions/{sid}").json()
print(f"final status: {session['status']}")
