"""Frame-update wire codec.

Layout (big-endian): magic "CU" | frame_seq u64 | tile_count u16 |
per tile: tile_col u16, tile_row u16, mode u8, payload_len u32, payload.
The tile size in pixels is session state, not carried per update.
"""

from __future__ import annotations

import struct

from .tiles import DirtyTileSet, TileEncoding, TileMode

MAGIC = b"CU"

_HEAD = struct.Struct(">2sQH")
_TILE_HEAD = struct.Struct(">HHBI")


class MalformedUpdate(ValueError):
    pass


def encode_update(update: DirtyTileSet) -> bytes:
    parts = [_HEAD.pack(MAGIC, update.frame_seq, len(update.tiles))]
    for col, row, enc in update.tiles:
        parts.append(_TILE_HEAD.pack(col, row, enc.mode, len(enc.payload)))
        parts.append(enc.payload)
    return b"".join(parts)


def decode_update(b: bytes, tile: int) -> DirtyTileSet:
    if len(b) < _HEAD.size:
        raise MalformedUpdate(f"truncated header: {len(b)} bytes")
    magic, frame_seq, count = _HEAD.unpack_from(b)
    if magic != MAGIC:
        raise MalformedUpdate(f"bad magic {magic!r}")
    off = _HEAD.size
    entries = []
    for _ in range(count):
        if len(b) - off < _TILE_HEAD.size:
            raise MalformedUpdate("truncated tile header")
        col, row, mode, plen = _TILE_HEAD.unpack_from(b, off)
        off += _TILE_HEAD.size
        if len(b) - off < plen:
            raise MalformedUpdate("truncated tile payload")
        try:
            tmode = TileMode(mode)
        except ValueError:
            raise MalformedUpdate(f"unknown tile mode {mode}") from None
        entries.append((col, row, TileEncoding(tmode, b[off:off + plen])))
        off += plen
    if off != len(b):
        raise MalformedUpdate(f"{len(b) - off} trailing bytes")
    return DirtyTileSet(frame_seq=frame_seq, tile=tile, tiles=tuple(entries))
