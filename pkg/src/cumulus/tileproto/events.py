"""Input event wire codec.

Layout (big-endian): kind u8 | seq u64 | payload.
Payload: key events carry keycode u16; MouseMove carries x u16, y u16;
MouseDown/MouseUp carry x u16, y u16, button u8.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass


class MalformedEvent(ValueError):
    """Raised when an event buffer cannot be decoded."""


class EventKind(enum.IntEnum):
    KEY_DOWN = 0x01
    KEY_UP = 0x02
    MOUSE_MOVE = 0x03
    MOUSE_DOWN = 0x04
    MOUSE_UP = 0x05


_KEY_KINDS = (EventKind.KEY_DOWN, EventKind.KEY_UP)
_MOUSE_KINDS = (EventKind.MOUSE_MOVE, EventKind.MOUSE_DOWN, EventKind.MOUSE_UP)
_BUTTON_KINDS = (EventKind.MOUSE_DOWN, EventKind.MOUSE_UP)

_HEAD = struct.Struct(">BQ")


@dataclass(frozen=True)
class InputEvent:
    kind: EventKind
    seq: int
    keycode: int = 0
    x: int = 0
    y: int = 0
    button: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seq < 2**64:
            raise ValueError(f"seq out of range: {self.seq}")
        if not 0 <= self.keycode < 2**16:
            raise ValueError(f"keycode out of range: {self.keycode}")
        if not (0 <= self.x < 2**16 and 0 <= self.y < 2**16):
            raise ValueError(f"coordinates out of range: ({self.x}, {self.y})")
        if not 0 <= self.button < 2**8:
            raise ValueError(f"button out of range: {self.button}")


def encode_input_event(e: InputEvent) -> bytes:
    head = _HEAD.pack(e.kind, e.seq)
    if e.kind in _KEY_KINDS:
        return head + struct.pack(">H", e.keycode)
    if e.kind is EventKind.MOUSE_MOVE:
        return head + struct.pack(">HH", e.x, e.y)
    return head + struct.pack(">HHB", e.x, e.y, e.button)


def decode_input_event(b: bytes) -> InputEvent:
    if len(b) < _HEAD.size + 1:
        raise MalformedEvent(f"truncated event: {len(b)} bytes")
    kind_byte, seq = _HEAD.unpack_from(b)
    try:
        kind = EventKind(kind_byte)
    except ValueError:
        raise MalformedEvent(f"unknown kind byte 0x{kind_byte:02X}") from None
    body = b[_HEAD.size:]
    if kind in _KEY_KINDS:
        want = 2
    elif kind is EventKind.MOUSE_MOVE:
        want = 4
    else:
        want = 5
    if len(body) < want:
        raise MalformedEvent(f"truncated {kind.name} payload: {len(body)} bytes")
    if len(body) > want:
        raise MalformedEvent(f"{len(body) - want} trailing bytes after {kind.name}")
    if kind in _KEY_KINDS:
        (keycode,) = struct.unpack(">H", body)
        return InputEvent(kind=kind, seq=seq, keycode=keycode)
    if kind is EventKind.MOUSE_MOVE:
        x, y = struct.unpack(">HH", body)
        return InputEvent(kind=kind, seq=seq, x=x, y=y)
    x, y, button = struct.unpack(">HHB", body)
    return InputEvent(kind=kind, seq=seq, x=x, y=y, button=button)
