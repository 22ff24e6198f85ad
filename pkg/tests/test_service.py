"""Session API: lifecycle transitions, corrections audit trail, idempotent
mutations, frame diagnostics views, persistence, and byte equality with the
CLI over the same inputs.

All tests run against the bundled demo stream; frozen numbers below
(peak 178.4967..., 29 detected + 2 coasted points, post-delete peak
131.9628...) come from the same oracle runs that pinned the pipeline tests.
"""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from conftest import STD_CALIBRATION

from shuttlespeed.cli import main as cli_main
from shuttlespeed.formats import read_speed_report, read_trajectory
from shuttlespeed.service import (
    _point_from_json,
    _point_to_json,
    create_app,
    replay_corrections,
)

DEMO_PEAK_KMH = 178.49668668182153
DEMO_AT_MARKER_KMH = 43.25545002433589
POST_DELETE_PEAK_KMH = 131.9627844267552


def make_client(tmp_path, **kwargs) -> TestClient:
    return TestClient(create_app(state_dir=tmp_path / "state", **kwargs))


def create_session(client: TestClient, stream_text: str) -> str:
    resp = client.post("/v1/sessions", content=stream_text)
    assert resp.status_code == 201, resp.text
    return resp.json()["session_id"]


def calibrate(client: TestClient, sid: str) -> dict:
    resp = client.put(f"/v1/sessions/{sid}/calibration", json=dict(STD_CALIBRATION))
    assert resp.status_code == 200, resp.text
    return resp.json()


def tracked_session(client: TestClient, stream_text: str) -> tuple[str, dict]:
    sid = create_session(client, stream_text)
    calibrate(client, sid)
    resp = client.post(f"/v1/sessions/{sid}/track")
    assert resp.status_code == 200, resp.text
    return sid, resp.json()


def session_status(client: TestClient, sid: str) -> str:
    return client.get(f"/v1/sessions/{sid}").json()["status"]


# --------------------------------------------------------------------------
# Creation


class TestSessionCreation:
    def test_create_returns_stream_summary(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        resp = client.post("/v1/sessions", content=demo_stream_text)
        assert resp.status_code == 201
        body = resp.json()
        assert body["status"] == "created"
        assert body["frame_count"] == 31
        assert (body["width"], body["height"], body["fps"]) == (1920.0, 1080.0, 30.0)
        assert body["calibration"] is None
        assert body["correction_count"] == 0

    def test_get_session_matches_create_view(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        created = client.post("/v1/sessions", content=demo_stream_text).json()
        fetched = client.get(f"/v1/sessions/{created['session_id']}").json()
        assert fetched == created

    def test_empty_body_rejected(self, tmp_path):
        client = make_client(tmp_path)
        resp = client.post("/v1/sessions", content="")
        assert resp.status_code == 422
        assert resp.json()["error"] == "validation"

    def test_malformed_stream_rejected_with_line_number(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        lines = demo_stream_text.splitlines()
        lines[2] = "not json"
        resp = client.post("/v1/sessions", content="\n".join(lines))
        assert resp.status_code == 422
        body = resp.json()
        assert body["error"] == "parse"
        assert body["message"].startswith("line 3:")

    def test_unknown_session_is_404(self, tmp_path):
        client = make_client(tmp_path)
        resp = client.get("/v1/sessions/deadbeef")
        assert resp.status_code == 404
        assert resp.json()["error"] == "not_found"


# --------------------------------------------------------------------------
# Lifecycle


class TestLifecycle:
    def test_full_walk(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        assert session_status(client, sid) == "created"

        # Nothing downstream exists yet.
        assert client.post(f"/v1/sessions/{sid}/track").status_code == 409
        assert client.get(f"/v1/sessions/{sid}/trajectory").status_code == 409
        assert client.get(f"/v1/sessions/{sid}/report").status_code == 409

        view = calibrate(client, sid)
        assert view["status"] == "calibrated"
        assert view["calibration"]["scale_factor_m_per_px"] == pytest.approx(5.0 / 600.0)

        resp = client.post(f"/v1/sessions/{sid}/track")
        assert resp.status_code == 200
        assert session_status(client, sid) == "tracked"

        resp = client.patch(f"/v1/sessions/{sid}/trajectory/5", json={"x": 500.0, "y": 200.0})
        assert resp.status_code == 200
        assert session_status(client, sid) == "verified"

        assert client.get(f"/v1/sessions/{sid}/report").status_code == 200
        assert session_status(client, sid) == "reported"

        # A correction on a reported session rewinds it to verified.
        client.patch(f"/v1/sessions/{sid}/trajectory/5", json={"x": 510.0, "y": 200.0})
        assert session_status(client, sid) == "verified"
        client.get(f"/v1/sessions/{sid}/report")
        assert session_status(client, sid) == "reported"

    def test_track_requires_calibration(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        resp = client.post(f"/v1/sessions/{sid}/track")
        assert resp.status_code == 409
        assert resp.json()["error"] == "conflict"

    def test_recalibration_discards_trajectory_and_corrections(
        self, tmp_path, demo_stream_text
    ):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        client.patch(f"/v1/sessions/{sid}/trajectory/5", json={"x": 500.0, "y": 200.0})

        view = calibrate(client, sid)
        assert view["status"] == "calibrated"
        assert view["correction_count"] == 0
        assert client.get(f"/v1/sessions/{sid}/trajectory").status_code == 409
        assert client.get(f"/v1/sessions/{sid}/corrections").json()["corrections"] == []

    def test_config_change_rewinds_to_calibrated(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        resp = client.put(
            f"/v1/sessions/{sid}/config", json={"tracker": {"max_coast_frames": 5}}
        )
        assert resp.status_code == 200
        assert resp.json()["status"] == "calibrated"
        assert client.get(f"/v1/sessions/{sid}/trajectory").status_code == 409

    def test_clearing_calibration_rewinds_to_created(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        resp = client.put(f"/v1/sessions/{sid}/config", json={"calibration": None})
        assert resp.status_code == 200
        assert resp.json()["status"] == "created"
        assert resp.json()["calibration"] is None

    def test_degenerate_calibration_rejected(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        resp = client.put(
            f"/v1/sessions/{sid}/calibration",
            json={"point_a": [60.0, 500.0], "point_b": [60.0, 500.0], "real_distance_m": 5.0},
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "degenerate_calibration"
        assert session_status(client, sid) == "created"

    def test_calibration_requires_all_fields(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        resp = client.put(
            f"/v1/sessions/{sid}/calibration", json={"point_a": [0, 0], "point_b": [1, 1]}
        )
        assert resp.status_code == 422
        assert "real_distance_m" in resp.json()["message"]


# --------------------------------------------------------------------------
# Tracking results


class TestTrackingResults:
    def test_demo_trajectory_composition(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        _, body = tracked_session(client, demo_stream_text)
        assert body["point_count"] == 31
        sources = [p["source"] for p in body["points"]]
        assert sources.count("detected") == 29
        assert sources.count("coasted") == 2
        coasted_frames = [p["frame"] for p in body["points"] if p["source"] == "coasted"]
        assert coasted_frames == [6, 20]
        for p in body["points"]:
            if p["source"] == "coasted":
                assert p["box"] is None and p["confidence"] is None
            else:
                assert len(p["box"]) == 4 and 0.0 <= p["confidence"] <= 1.0

    def test_demo_report_values(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        # The demo default config has no marker; install the full demo config.
        report = client.get(f"/v1/sessions/{sid}/report").json()
        assert report["mode"] == "leading_edge"
        assert len(report["samples"]) == 28
        assert report["peak"]["speed_kmh"] == pytest.approx(DEMO_PEAK_KMH)
        assert (report["peak"]["from_frame"], report["peak"]["to_frame"]) == (0, 1)

    def test_marker_config_adds_at_marker_sample(
        self, tmp_path, demo_stream_text, demo_config_data
    ):
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        resp = client.put(f"/v1/sessions/{sid}/config", json=demo_config_data)
        assert resp.json()["status"] == "calibrated"
        client.post(f"/v1/sessions/{sid}/track")
        report = client.get(f"/v1/sessions/{sid}/report").json()
        assert report["at_marker"] is not None
        assert report["at_marker"]["speed_kmh"] == pytest.approx(DEMO_AT_MARKER_KMH)

    def test_file_endpoints_parse_with_format_readers(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        traj_text = client.get(f"/v1/sessions/{sid}/trajectory/file").text
        assert len(read_trajectory(traj_text).points) == 31
        report_text = client.get(f"/v1/sessions/{sid}/report/file").text
        assert read_speed_report(report_text).peak.speed_kmh == pytest.approx(DEMO_PEAK_KMH)

    def test_api_and_cli_emit_identical_files(
        self, tmp_path, capsys, demo_stream_text, demo_config_data
    ):
        # Same stream + same config through either interface must produce
        # byte-identical trajectory and report files.
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        client.put(f"/v1/sessions/{sid}/config", json=demo_config_data)
        client.post(f"/v1/sessions/{sid}/track")
        api_traj = client.get(f"/v1/sessions/{sid}/trajectory/file").text
        api_report = client.get(f"/v1/sessions/{sid}/report/file").text

        stream = tmp_path / "stream.jsonl"
        stream.write_text(demo_stream_text, encoding="utf-8")
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(demo_config_data), encoding="utf-8")
        traj = tmp_path / "traj.jsonl"
        report = tmp_path / "report.jsonl"
        assert cli_main(["track", "--stream", str(stream), "--out", str(traj),
                         "--config", str(cfg)]) == 0
        assert cli_main(["speed", "--trajectory", str(traj), "--out", str(report),
                         "--config", str(cfg)]) == 0
        capsys.readouterr()

        assert traj.read_text(encoding="utf-8") == api_traj
        assert report.read_text(encoding="utf-8") == api_report

    def test_track_accepts_empty_body(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        calibrate(client, sid)
        resp = client.post(f"/v1/sessions/{sid}/track", json={"request_id": "t-1"})
        assert resp.status_code == 200


# --------------------------------------------------------------------------
# Corrections


class TestCorrections:
    def test_patch_replaces_point(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, before = tracked_session(client, demo_stream_text)
        old = next(p for p in before["points"] if p["frame"] == 5)

        resp = client.patch(
            f"/v1/sessions/{sid}/trajectory/5", json={"x": old["x"] + 10.0, "y": old["y"]}
        )
        after = next(p for p in resp.json()["points"] if p["frame"] == 5)
        assert after["source"] == "user_corrected"
        assert after["x"] == pytest.approx(old["x"] + 10.0)
        assert after["box"] is None

        log = client.get(f"/v1/sessions/{sid}/corrections").json()["corrections"]
        assert len(log) == 1
        entry = log[0]
        assert entry["kind"] == "patch" and entry["frame"] == 5
        assert entry["old"] == [old["x"], old["y"]]
        assert entry["new"] == [old["x"] + 10.0, old["y"]]

    def test_delete_shifts_peak(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        resp = client.delete(f"/v1/sessions/{sid}/trajectory/0")
        assert resp.status_code == 200
        assert resp.json()["point_count"] == 30
        report = client.get(f"/v1/sessions/{sid}/report").json()
        assert (report["peak"]["from_frame"], report["peak"]["to_frame"]) == (1, 2)
        assert report["peak"]["speed_kmh"] == pytest.approx(POST_DELETE_PEAK_KMH)

    def test_working_trajectory_equals_replayed_log(self, tmp_path, demo_stream_text):
        # The audit contract: raw tracker output + corrections log fully
        # determines the working trajectory.
        client = make_client(tmp_path)
        sid, raw_view = tracked_session(client, demo_stream_text)
        client.patch(f"/v1/sessions/{sid}/trajectory/5", json={"x": 500.0, "y": 200.0})
        client.delete(f"/v1/sessions/{sid}/trajectory/0")
        client.patch(f"/v1/sessions/{sid}/trajectory/12", json={"x": 900.0, "y": 300.0})

        log = client.get(f"/v1/sessions/{sid}/corrections").json()["corrections"]
        assert [e["kind"] for e in log] == ["patch", "delete", "patch"]

        raw_points = [_point_from_json(p) for p in raw_view["points"]]
        replayed = [_point_to_json(p) for p in replay_corrections(raw_points, log)]
        working = client.get(f"/v1/sessions/{sid}/trajectory").json()["points"]
        assert replayed == working

    def test_patch_after_delete_rejected(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        client.delete(f"/v1/sessions/{sid}/trajectory/0")
        resp = client.patch(f"/v1/sessions/{sid}/trajectory/0", json={"x": 1.0, "y": 1.0})
        assert resp.status_code == 422
        assert "frame 0" in resp.json()["message"]

    def test_patch_outside_frame_rejected(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        resp = client.patch(
            f"/v1/sessions/{sid}/trajectory/5", json={"x": -5.0, "y": 200.0}
        )
        assert resp.status_code == 422
        assert "outside" in resp.json()["message"]

    def test_patch_non_numeric_rejected(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        resp = client.patch(
            f"/v1/sessions/{sid}/trajectory/5", json={"x": "abc", "y": 200.0}
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "validation"

    def test_corrections_require_trajectory(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        assert (
            client.patch(f"/v1/sessions/{sid}/trajectory/5", json={"x": 1.0, "y": 1.0}).status_code
            == 409
        )
        assert client.delete(f"/v1/sessions/{sid}/trajectory/5").status_code == 409


# --------------------------------------------------------------------------
# Idempotency


class TestIdempotency:
    def test_patch_replay_applies_once(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        body = {"x": 500.0, "y": 200.0, "request_id": "fix-5"}
        first = client.patch(f"/v1/sessions/{sid}/trajectory/5", json=body)
        second = client.patch(f"/v1/sessions/{sid}/trajectory/5", json=body)
        assert first.json() == second.json()
        log = client.get(f"/v1/sessions/{sid}/corrections").json()["corrections"]
        assert len(log) == 1

    def test_delete_replay_applies_once(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        url = f"/v1/sessions/{sid}/trajectory/0"
        first = client.delete(url, params={"request_id": "drop-0"})
        second = client.delete(url, params={"request_id": "drop-0"})
        assert first.json() == second.json()
        assert second.json()["point_count"] == 30
        log = client.get(f"/v1/sessions/{sid}/corrections").json()["corrections"]
        assert len(log) == 1

    def test_track_replay_preserves_corrections(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        calibrate(client, sid)
        client.post(f"/v1/sessions/{sid}/track", json={"request_id": "run-1"})
        client.patch(f"/v1/sessions/{sid}/trajectory/5", json={"x": 500.0, "y": 200.0})

        # Replaying the original run must not wipe the correction log.
        client.post(f"/v1/sessions/{sid}/track", json={"request_id": "run-1"})
        assert session_status(client, sid) == "verified"
        assert len(client.get(f"/v1/sessions/{sid}/corrections").json()["corrections"]) == 1

        # A genuinely new run does.
        client.post(f"/v1/sessions/{sid}/track", json={"request_id": "run-2"})
        assert session_status(client, sid) == "tracked"
        assert client.get(f"/v1/sessions/{sid}/corrections").json()["corrections"] == []

    def test_empty_request_id_rejected(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)
        resp = client.patch(
            f"/v1/sessions/{sid}/trajectory/5",
            json={"x": 500.0, "y": 200.0, "request_id": ""},
        )
        assert resp.status_code == 422
        assert "request_id" in resp.json()["message"]


# --------------------------------------------------------------------------
# Frame views


class TestFrameViews:
    def test_before_tracking_shows_raw_candidates(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        view = client.get(f"/v1/sessions/{sid}/frames/0").json()
        assert view["prediction"] is None
        assert len(view["candidates"]) == 2
        for cand in view["candidates"]:
            assert cand["accepted"] is None
            assert cand["score"] is None
            assert cand["selected"] is False

    def test_after_tracking_shows_gate_evaluations(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid, _ = tracked_session(client, demo_stream_text)

        seed = client.get(f"/v1/sessions/{sid}/frames/0").json()
        assert seed["prediction"] is None  # nothing to predict from yet
        assert sum(c["selected"] for c in seed["candidates"]) == 1

        view = client.get(f"/v1/sessions/{sid}/frames/1").json()
        assert view["prediction"] is not None and len(view["prediction"]) == 2
        assert sum(c["selected"] for c in view["candidates"]) == 1
        chosen = next(c for c in view["candidates"] if c["selected"])
        assert chosen["accepted"] is True
        assert chosen["score"] is not None and 0.0 <= chosen["score"] <= 1.0
        assert chosen["implied_speed_kmh"] is not None

    def test_out_of_range_frame_is_404(self, tmp_path, demo_stream_text):
        client = make_client(tmp_path)
        sid = create_session(client, demo_stream_text)
        assert client.get(f"/v1/sessions/{sid}/frames/999").status_code == 404
        assert client.get(f"/v1/sessions/{sid}/frames/-1").status_code == 404


# --------------------------------------------------------------------------
# Persistence and defaults


class TestPersistence:
    def test_sessions_survive_app_restart(self, tmp_path, demo_stream_text):
        first = make_client(tmp_path)
        sid, _ = tracked_session(first, demo_stream_text)
        first.patch(
            f"/v1/sessions/{sid}/trajectory/5",
            json={"x": 500.0, "y": 200.0, "request_id": "fix-5"},
        )
        expected = first.get(f"/v1/sessions/{sid}/trajectory").json()

        second = make_client(tmp_path)  # same state dir, fresh store
        assert session_status(second, sid) == "verified"
        assert second.get(f"/v1/sessions/{sid}/trajectory").json() == expected

        # Idempotency keys persist too: the replayed patch adds nothing.
        second.patch(
            f"/v1/sessions/{sid}/trajectory/5",
            json={"x": 500.0, "y": 200.0, "request_id": "fix-5"},
        )
        log = second.get(f"/v1/sessions/{sid}/corrections").json()["corrections"]
        assert len(log) == 1

    def test_default_config_preconfigures_sessions(
        self, tmp_path, demo_stream_text, demo_config
    ):
        client = make_client(tmp_path, default_config=demo_config)
        resp = client.post("/v1/sessions", content=demo_stream_text)
        body = resp.json()
        assert body["status"] == "calibrated"
        assert body["calibration"] is not None

        sid = body["session_id"]
        assert client.post(f"/v1/sessions/{sid}/track").status_code == 200
        report = client.get(f"/v1/sessions/{sid}/report").json()
        assert report["peak"]["speed_kmh"] == pytest.approx(DEMO_PEAK_KMH)
        assert report["at_marker"]["speed_kmh"] == pytest.approx(DEMO_AT_MARKER_KMH)
