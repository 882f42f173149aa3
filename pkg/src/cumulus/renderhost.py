"""Deterministic server-side canvas application.

Sessions consume input events and produce framebuffers: key presses fill
8x16 glyph cells with a keycode-derived color, mouse drags draw white
Bresenham segments.  Rendering is a pure function of state, so identical
event sequences always produce bit-identical frames.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from typing import Optional

from .tileproto import (
    DEFAULT_TILE,
    DirtyTileSet,
    EventKind,
    Framebuffer,
    InputEvent,
    diff_framebuffer,
)

CELL_W = 8
CELL_H = 16


class BadGeometry(ValueError):
    pass


class OutOfOrderEvent(ValueError):
    pass


@dataclass(frozen=True)
class AppState:
    width: int
    height: int
    cursor_col: int = 0
    cursor_row: int = 0
    typed_cells: tuple = ()  # of ((col, row), keycode), insertion-ordered
    drawn_segments: tuple = ()  # of ((x0, y0), (x1, y1))
    drag_origin: Optional[tuple] = None

    @property
    def grid_cols(self) -> int:
        return self.width // CELL_W

    @property
    def grid_rows(self) -> int:
        return self.height // CELL_H


def new_session(width: int, height: int, tile: int = DEFAULT_TILE) -> AppState:
    if width <= 0 or height <= 0 or width % CELL_W or width % tile \
            or height % CELL_H or height % tile:
        raise BadGeometry(f"{width}x{height} (cell {CELL_W}x{CELL_H}, tile {tile})")
    return AppState(width=width, height=height)


def _advance_cursor(s: AppState) -> AppState:
    col = s.cursor_col + 1
    row = s.cursor_row
    if col >= s.grid_cols:
        col = 0
        row += 1
        if row >= s.grid_rows:
            row = 0
    return replace(s, cursor_col=col, cursor_row=row)


def apply_event(s: AppState, e: InputEvent) -> AppState:
    if e.kind is EventKind.KEY_DOWN:
        cells = dict(s.typed_cells)
        cells[(s.cursor_col, s.cursor_row)] = e.keycode
        return _advance_cursor(replace(s, typed_cells=tuple(cells.items())))
    if e.kind is EventKind.KEY_UP:
        return s
    if e.kind is EventKind.MOUSE_DOWN:
        return replace(s, drag_origin=(e.x, e.y))
    if e.kind is EventKind.MOUSE_MOVE:
        if s.drag_origin is None:
            return s
        seg = (s.drag_origin, (e.x, e.y))
        return replace(s, drawn_segments=s.drawn_segments + (seg,),
                       drag_origin=(e.x, e.y))
    # MOUSE_UP
    return replace(s, drag_origin=None)


def glyph_color(keycode: int) -> tuple:
    return (keycode % 256, (3 * keycode) % 256, (7 * keycode) % 256)


def _bresenham(x0: int, y0: int, x1: int, y1: int):
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        yield x0, y0
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def render(s: AppState) -> Framebuffer:
    stride = s.width * 3
    pixels = bytearray(s.width * s.height * 3)
    for (col, row), keycode in s.typed_cells:
        r, g, b = glyph_color(keycode)
        cell_row = bytes((r, g, b)) * CELL_W
        x0 = col * CELL_W * 3
        for y in range(row * CELL_H, (row + 1) * CELL_H):
            off = y * stride + x0
            pixels[off:off + CELL_W * 3] = cell_row
    for (x0, y0), (x1, y1) in s.drawn_segments:
        for x, y in _bresenham(x0, y0, x1, y1):
            if 0 <= x < s.width and 0 <= y < s.height:
                off = y * stride + x * 3
                pixels[off:off + 3] = b"\xff\xff\xff"
    return Framebuffer(s.width, s.height, bytes(pixels))


@dataclass
class SessionHandle:
    session_id: str
    user_id: str
    host_node: str
    state: AppState
    last_frame: Framebuffer
    last_seq: int = -1
    frame_seq: int = 0
    tile: int = DEFAULT_TILE


def open_session(user_id: str, host_node: str, width: int, height: int,
                 tile: int = DEFAULT_TILE,
                 session_id: Optional[str] = None) -> SessionHandle:
    state = new_session(width, height, tile)
    return SessionHandle(
        session_id=session_id or uuid.uuid4().hex,
        user_id=user_id,
        host_node=host_node,
        state=state,
        last_frame=render(state),
        tile=tile,
    )


def step_session(h: SessionHandle, events: list) -> DirtyTileSet:
    """Fold events into the session, render once, and diff against the last frame.

    Mutates the handle in place and returns the dirty-tile update.
    """
    state = h.state
    last_seq = h.last_seq
    for e in events:
        if e.seq <= last_seq:
            raise OutOfOrderEvent(f"seq {e.seq} after {last_seq}")
        last_seq = e.seq
        state = apply_event(state, e)
    frame = render(state)
    h.frame_seq += 1
    update = diff_framebuffer(h.last_frame, frame, h.tile, frame_seq=h.frame_seq)
    h.state = state
    h.last_frame = frame
    h.last_seq = last_seq
    return update


_REPLAY_KINDS = {
    "KEYDOWN": EventKind.KEY_DOWN,
    "KEYUP": EventKind.KEY_UP,
    "MOUSEMOVE": EventKind.MOUSE_MOVE,
    "MOUSEDOWN": EventKind.MOUSE_DOWN,
    "MOUSEUP": EventKind.MOUSE_UP,
}


def parse_replay_script(text: str, start_seq: int = 0) -> list:
    """Parse a line-oriented replay script (`KEYDOWN 65`, `MOUSEMOVE 100 200`, ...).

    Sequence numbers are assigned by the reader, starting at `start_seq`.
    """
    events = []
    seq = start_seq
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kind = _REPLAY_KINDS.get(parts[0].upper())
        if kind is None:
            raise ValueError(f"line {lineno}: unknown directive {parts[0]!r}")
        try:
            if kind in (EventKind.KEY_DOWN, EventKind.KEY_UP):
                events.append(InputEvent(kind=kind, seq=seq, keycode=int(parts[1])))
            elif kind is EventKind.MOUSE_MOVE:
                events.append(InputEvent(kind=kind, seq=seq,
                                         x=int(parts[1]), y=int(parts[2])))
            else:
                button = int(parts[3]) if len(parts) > 3 else 0
                events.append(InputEvent(kind=kind, seq=seq,
                                         x=int(parts[1]), y=int(parts[2]),
                                         button=button))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {line!r}: {exc}") from None
        seq += 1
    return events
