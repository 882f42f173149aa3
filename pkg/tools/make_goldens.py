#!/usr/bin/env python3
"""Generate shared golden files for client conformance testing.

Writes into golden/ at the repo root:
    keymap.json             browser key -> wire keycode table
    input_vectors.json      events with their exact wire bytes (hex)
    updates/streamN/*.bin   update wire frames in delivery order
    updates/streamN.json    geometry, tile size, expected pixel digests

Deterministic: re-running produces identical bytes.
"""

import hashlib
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cumulus.renderhost import open_session, step_session
from cumulus.tileproto import (
    EventKind,
    InputEvent,
    apply_update,
    encode_input_event,
    encode_update,
    full_frame_update,
)

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "golden")


def keymap() -> dict:
    """Uppercase code points for letters/digits; fixed table for named keys."""
    table = {}
    for ch in "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789":
        table[ch] = ord(ch)
    table.update({
        "Enter": 13, "Backspace": 8, "Tab": 9, "Escape": 27, " ": 32,
        "ArrowLeft": 37, "ArrowUp": 38, "ArrowRight": 39, "ArrowDown": 40,
        "Shift": 16, "Control": 17, "Alt": 18, "Delete": 46, "Home": 36,
        "End": 35, "PageUp": 33, "PageDown": 34,
    })
    return table


def input_vectors() -> list:
    events = [
        InputEvent(kind=EventKind.KEY_DOWN, seq=0, keycode=65),
        InputEvent(kind=EventKind.KEY_UP, seq=1, keycode=65),
        InputEvent(kind=EventKind.KEY_DOWN, seq=2, keycode=13),
        InputEvent(kind=EventKind.MOUSE_MOVE, seq=3, x=100, y=200),
        InputEvent(kind=EventKind.MOUSE_DOWN, seq=4, x=10, y=20, button=0),
        InputEvent(kind=EventKind.MOUSE_MOVE, seq=5, x=639, y=479),
        InputEvent(kind=EventKind.MOUSE_UP, seq=6, x=639, y=479, button=0),
        InputEvent(kind=EventKind.KEY_DOWN, seq=7, keycode=90),
        InputEvent(kind=EventKind.MOUSE_DOWN, seq=8, x=0, y=0, button=2),
        InputEvent(kind=EventKind.KEY_DOWN, seq=2**40, keycode=32),
    ]
    out = []
    for e in events:
        row = {"kind": e.kind.name, "seq": e.seq, "wire_hex": encode_input_event(e).hex()}
        if e.kind in (EventKind.KEY_DOWN, EventKind.KEY_UP):
            row["keycode"] = e.keycode
        else:
            row["x"], row["y"] = e.x, e.y
        if e.kind in (EventKind.MOUSE_DOWN, EventKind.MOUSE_UP):
            row["button"] = e.button
        out.append(row)
    return out


STREAM_SCRIPTS = {
    # Typing: glyph cells accumulate left to right.
    "stream0": [("KEYDOWN", 72), ("KEYDOWN", 73), ("KEYDOWN", 33),
                ("KEYUP", 33), ("KEYDOWN", 65)],
    # Drag: a polyline drawn across the canvas.
    "stream1": [("MOUSEDOWN", 10, 10), ("MOUSEMOVE", 60, 40),
                ("MOUSEMOVE", 120, 30), ("MOUSEUP", 120, 30),
                ("MOUSEMOVE", 200, 200)],
    # Mixed batch boundaries exercise multi-event updates.
    "stream2": [("KEYDOWN", 81), ("MOUSEDOWN", 5, 100), ("MOUSEMOVE", 300, 120),
                ("KEYDOWN", 87), ("MOUSEMOVE", 310, 300), ("MOUSEUP", 310, 300),
                ("KEYDOWN", 69), ("KEYDOWN", 82), ("KEYDOWN", 84), ("KEYDOWN", 89)],
}

_KINDS = {"KEYDOWN": EventKind.KEY_DOWN, "KEYUP": EventKind.KEY_UP,
          "MOUSEMOVE": EventKind.MOUSE_MOVE, "MOUSEDOWN": EventKind.MOUSE_DOWN,
          "MOUSEUP": EventKind.MOUSE_UP}


def build_stream(name: str, script: list, batch: int) -> dict:
    handle = open_session("golden", "r0", 640, 480)
    events = []
    for seq, step in enumerate(script):
        kind = _KINDS[step[0]]
        if kind in (EventKind.KEY_DOWN, EventKind.KEY_UP):
            events.append(InputEvent(kind=kind, seq=seq, keycode=step[1]))
        else:
            events.append(InputEvent(kind=kind, seq=seq, x=step[1], y=step[2]))

    stream_dir = os.path.join(ROOT, "updates", name)
    os.makedirs(stream_dir, exist_ok=True)
    frames = [encode_update(full_frame_update(handle.last_frame, handle.tile,
                                              frame_seq=handle.frame_seq))]
    digests = [handle.last_frame.digest()]
    shadow = handle.last_frame
    for i in range(0, len(events), batch):
        update = step_session(handle, events[i:i + batch])
        frames.append(encode_update(update))
        shadow = apply_update(shadow, update)
        assert shadow.digest() == handle.last_frame.digest()
        digests.append(shadow.digest())
    for i, frame in enumerate(frames):
        with open(os.path.join(stream_dir, f"msg{i:03d}.bin"), "wb") as f:
            f.write(frame)
    return {
        "width": 640, "height": 480, "tile": handle.tile,
        "messages": len(frames),
        "digests_after_each": digests,
        "final_digest": digests[-1],
        "wire_sha256": hashlib.sha256(b"".join(frames)).hexdigest(),
    }


def main() -> None:
    os.makedirs(ROOT, exist_ok=True)
    with open(os.path.join(ROOT, "keymap.json"), "w") as f:
        json.dump(keymap(), f, indent=2, sort_keys=True)
        f.write("\n")
    with open(os.path.join(ROOT, "input_vectors.json"), "w") as f:
        json.dump(input_vectors(), f, indent=2)
        f.write("\n")
    for name, script in STREAM_SCRIPTS.items():
        batch = 2 if name == "stream2" else 1
        meta = build_stream(name, script, batch)
        with open(os.path.join(ROOT, "updates", f"{name}.json"), "w") as f:
            json.dump(meta, f, indent=2)
            f.write("\n")
    print(f"golden files written under {os.path.normpath(ROOT)}")


if __name__ == "__main__":
    main()
