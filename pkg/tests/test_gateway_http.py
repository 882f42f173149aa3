import hashlib
import random

import pytest
from fastapi.testclient import TestClient

from cumulus.gateway_http import create_app
from cumulus.tileproto import (
    EventKind,
    Framebuffer,
    InputEvent,
    apply_update,
    decode_update,
    encode_input_event,
)
from test_gateway import make_gateway


@pytest.fixture()
def client():
    gw = make_gateway(nodes=2, slots=8)
    return TestClient(create_app(gw)), gw


def open_session(client, user="alice"):
    r = client.post("/sessions", json={"user_id": user, "width": 640, "height": 480})
    assert r.status_code == 200
    return r.json()


def test_open_session(client):
    c, _ = client
    body = open_session(c)
    assert body["width"] == 640 and body["tile"] == 16
    assert body["session_id"]


def test_session_saturation_503(client):
    c, _ = client
    for i in range(16):
        open_session(c, f"u{i}")
    r = c.post("/sessions", json={"user_id": "late"})
    assert r.status_code == 503


def test_stream_initial_full_frame_and_event(client):
    c, _ = client
    body = open_session(c)
    sid = body["session_id"]
    with c.websocket_connect(f"/sessions/{sid}/stream") as ws:
        first = ws.receive_bytes()
        update = decode_update(first, 16)
        fb = apply_update(Framebuffer.blank(640, 480, (1, 1, 1)), update)
        assert fb.pixels == bytes(640 * 480 * 3)  # all black after sync
        ws.send_bytes(encode_input_event(
            InputEvent(kind=EventKind.KEY_DOWN, seq=0, keycode=65)))
        delta = decode_update(ws.receive_bytes(), 16)
        assert [(col, r) for col, r, _ in delta.tiles] == [(0, 0)]
        fb = apply_update(fb, delta)
    r = c.get(f"/sessions/{sid}/digest")
    assert r.json()["sha256"] == fb.digest()


def test_stream_unknown_session(client):
    c, _ = client
    with pytest.raises(Exception):
        with c.websocket_connect("/sessions/nope/stream") as ws:
            ws.receive_bytes()


def test_files_round_trip_and_ranges(client):
    c, _ = client
    data = random.Random(5).randbytes(2 * 1024 * 1024 + 17)
    assert c.put("/files/media/clip.bin", content=data).status_code == 200
    r = c.get("/files/media/clip.bin")
    assert r.status_code == 200
    assert hashlib.sha256(r.content).digest() == hashlib.sha256(data).digest()
    r = c.get("/files/media/clip.bin", headers={"Range": "bytes=100-199"})
    assert r.status_code == 206
    assert r.content == data[100:200]


def test_files_404_and_416(client):
    c, _ = client
    assert c.get("/files/nope").status_code == 404
    c.put("/files/f", content=b"12345")
    assert c.get("/files/f", headers={"Range": "bytes=3-9"}).status_code == 416


def test_cluster_telemetry(client):
    c, gw = client
    open_session(c)
    rows = c.get("/cluster/telemetry").json()
    assert {row["node_id"] for row in rows} == {"r0", "r1"}
    total_sessions = sum(row["node.sessions"] for row in rows)
    assert total_sessions == 1
    for row in rows:
        assert row["node.cpu.capacity"] == 8000.0
