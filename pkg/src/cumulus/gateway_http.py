"""Real-transport gateway: the HTTP/WebSocket face of the cluster.

Endpoints:
    POST /sessions                      -> {"session_id": ...}
    WS   /sessions/{id}/stream          -> update frames out, event frames in
    GET  /sessions/{id}/digest          -> frame digest (test mode aid)
    PUT  /files/{path}, GET /files/{path} (standard Range header)
    GET  /cluster/telemetry             -> per-node OID-keyed gauges

The stream carries the binary wire formats verbatim: the first message
is a full-frame update, every later one is the delta for a batch of
input events.
"""

from __future__ import annotations

import re
from typing import Optional

from fastapi import FastAPI, Request, Response, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .gateway import Gateway, UnknownSession
from .renderhost import OutOfOrderEvent
from .tileproto import MalformedEvent, decode_input_event
from .vmmanager import GAUGE_KEYS, NoCapacity

_RANGE_RE = re.compile(r"bytes=(\d+)-(\d*)$")


def create_app(gateway: Gateway) -> FastAPI:
    app = FastAPI(title="cumulus gateway")

    @app.post("/sessions")
    async def open_session(request: Request) -> JSONResponse:
        body = await request.json()
        user_id = body.get("user_id", "")
        width = int(body.get("width", 640))
        height = int(body.get("height", 480))
        try:
            handle = gateway.open_session(user_id, width, height)
        except NoCapacity as exc:
            return JSONResponse({"error": str(exc)}, status_code=503)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        return JSONResponse({"session_id": handle.session_id,
                             "width": handle.state.width,
                             "height": handle.state.height,
                             "tile": handle.tile,
                             "host_node": handle.host_node})

    @app.get("/sessions/{session_id}/digest")
    async def session_digest(session_id: str) -> JSONResponse:
        handle = gateway.sessions.get(session_id)
        if handle is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        return JSONResponse({"frame_seq": handle.frame_seq,
                             "sha256": handle.last_frame.digest()})

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str) -> None:
        await ws.accept()
        try:
            sub = gateway.subscribe(session_id)
        except UnknownSession:
            await ws.close(code=4004)
            return
        for frame in sub.pending:
            await ws.send_bytes(frame)
        sub.pending.clear()
        try:
            while True:
                data = await ws.receive_bytes()
                try:
                    event = decode_input_event(bytes(data))
                    update = gateway.route_events(session_id, [event])
                except (MalformedEvent, OutOfOrderEvent, UnknownSession):
                    await ws.close(code=4002)
                    return
                await ws.send_bytes(update)
                sub.pending.clear()
        except WebSocketDisconnect:
            pass

    @app.put("/files/{path:path}")
    async def put_file(path: str, request: Request) -> Response:
        data = await request.body()
        status = gateway.put_object("/" + path, data)
        return Response(status_code=status)

    @app.get("/files/{path:path}")
    async def get_file(path: str, request: Request) -> Response:
        range_header: Optional[str] = request.headers.get("range")
        offset, length = 0, None
        partial = False
        if range_header:
            match = _RANGE_RE.match(range_header.strip())
            if not match:
                return Response(status_code=416)
            offset = int(match.group(1))
            if match.group(2):
                length = int(match.group(2)) - offset + 1
            partial = True
        status, data = gateway.get_object("/" + path, offset, length)
        if status != 200:
            return Response(status_code=status)
        return Response(content=data, status_code=206 if partial else 200,
                        media_type="application/octet-stream")

    @app.get("/cluster/telemetry")
    async def telemetry() -> JSONResponse:
        out = []
        for node_id in gateway.vm.registered:
            t = gateway.vm.telemetry.get(node_id)
            if t is None:
                continue
            row = {"node_id": node_id}
            for key in GAUGE_KEYS:
                _, kind, which = (key.split(".") + ["", ""])[:3]
                if key == "node.sessions":
                    row[key] = t.session_count
                else:
                    vec = t.capacity if which == "capacity" else t.allocated
                    row[key] = getattr(vec, kind)
            out.append(row)
        return JSONResponse(out)

    return app
