"""Tile diff engine and per-tile payload encoding."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import kernels
from .framebuffer import Framebuffer


class DimensionMismatch(ValueError):
    pass


class BadTileLength(ValueError):
    pass


class TileOutOfBounds(ValueError):
    pass


class TileMode(enum.IntEnum):
    RAW = 0
    RLE = 1


@dataclass(frozen=True)
class TileEncoding:
    mode: TileMode
    payload: bytes = field(repr=False)


@dataclass(frozen=True)
class DirtyTileSet:
    """Per-frame delta: (tile_col, tile_row, encoding) entries, tile size in pixels."""

    frame_seq: int
    tile: int
    tiles: tuple  # of (col, row, TileEncoding)

    def __len__(self) -> int:
        return len(self.tiles)


def encode_tile(raw_pixels: bytes, tile: int) -> TileEncoding:
    """Encode one tile's raw pixels, picking the shorter of Raw/RLE (Raw on ties)."""
    if len(raw_pixels) != tile * tile * 3:
        raise BadTileLength(f"{len(raw_pixels)} bytes, want {tile * tile * 3}")
    rle = kernels.rle_encode(raw_pixels)
    if len(rle) < len(raw_pixels):
        return TileEncoding(TileMode.RLE, rle)
    return TileEncoding(TileMode.RAW, bytes(raw_pixels))


def decode_tile(enc: TileEncoding, tile: int) -> bytes:
    out_len = tile * tile * 3
    if enc.mode is TileMode.RAW:
        if len(enc.payload) != out_len:
            raise BadTileLength(f"raw payload {len(enc.payload)} bytes, want {out_len}")
        return enc.payload
    return kernels.rle_decode(enc.payload, out_len)


def diff_framebuffer(prev: Framebuffer, nxt: Framebuffer, tile: int,
                     frame_seq: int = 0) -> DirtyTileSet:
    """Dirty-tile delta between two frames of identical tile-aligned geometry.

    A tile is listed iff any pixel in it differs; applying the result to
    `prev` reproduces `nxt` exactly.
    """
    if (prev.width, prev.height) != (nxt.width, nxt.height):
        raise DimensionMismatch(
            f"{prev.width}x{prev.height} vs {nxt.width}x{nxt.height}"
        )
    if prev.width % tile or prev.height % tile:
        raise DimensionMismatch(
            f"{prev.width}x{prev.height} not divisible by tile {tile}"
        )
    dirty = kernels.dirty_tiles(prev.pixels, nxt.pixels, prev.width, prev.height, tile)
    entries = []
    for col, row in dirty:
        raw = kernels.extract_tile(nxt.pixels, nxt.width, tile, col, row)
        entries.append((col, row, encode_tile(raw, tile)))
    return DirtyTileSet(frame_seq=frame_seq, tile=tile, tiles=tuple(entries))


def full_frame_update(fb: Framebuffer, tile: int, frame_seq: int = 0) -> DirtyTileSet:
    """Update listing every tile; the synchronization base for a new subscriber."""
    entries = []
    for row in range(fb.height // tile):
        for col in range(fb.width // tile):
            raw = kernels.extract_tile(fb.pixels, fb.width, tile, col, row)
            entries.append((col, row, encode_tile(raw, tile)))
    return DirtyTileSet(frame_seq=frame_seq, tile=tile, tiles=tuple(entries))


def apply_update(fb: Framebuffer, update: DirtyTileSet) -> Framebuffer:
    """Return a new framebuffer with the update's tiles painted over `fb`."""
    tile = update.tile
    cols = fb.width // tile
    rows = fb.height // tile
    pixels = bytearray(fb.pixels)
    for col, row, enc in update.tiles:
        if not (0 <= col < cols and 0 <= row < rows):
            raise TileOutOfBounds(f"tile ({col}, {row}) outside {cols}x{rows} grid")
        kernels.blit_tile(pixels, fb.width, tile, col, row, decode_tile(enc, tile))
    return Framebuffer(fb.width, fb.height, bytes(pixels))
