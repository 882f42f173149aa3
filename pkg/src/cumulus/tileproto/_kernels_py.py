"""Pure-Python tile kernels.

Same surface as the compiled `_kernels` extension.  Row slices are
compared as bytes objects so the inner loops stay in C even here.
"""

from __future__ import annotations

BACKEND = "python"


def dirty_tiles(prev: bytes, nxt: bytes, width: int, height: int, tile: int) -> list:
    """Return (col, row) of every tile whose pixels differ between frames."""
    if prev == nxt:
        return []
    cols = width // tile
    rows = height // tile
    stride = width * 3
    tile_row_bytes = tile * 3
    out = []
    for tr in range(rows):
        y0 = tr * tile
        # Skip whole tile rows that match.
        band0 = y0 * stride
        band1 = (y0 + tile) * stride
        if prev[band0:band1] == nxt[band0:band1]:
            continue
        for tc in range(cols):
            x0 = tc * tile_row_bytes
            for y in range(y0, y0 + tile):
                off = y * stride + x0
                if prev[off:off + tile_row_bytes] != nxt[off:off + tile_row_bytes]:
                    out.append((tc, tr))
                    break
    return out


def extract_tile(pixels: bytes, width: int, tile: int, col: int, row: int) -> bytes:
    stride = width * 3
    x0 = col * tile * 3
    parts = []
    for y in range(row * tile, (row + 1) * tile):
        off = y * stride + x0
        parts.append(pixels[off:off + tile * 3])
    return b"".join(parts)


def blit_tile(pixels: bytearray, width: int, tile: int, col: int, row: int, raw: bytes) -> None:
    stride = width * 3
    x0 = col * tile * 3
    tile_row_bytes = tile * 3
    for i, y in enumerate(range(row * tile, (row + 1) * tile)):
        off = y * stride + x0
        pixels[off:off + tile_row_bytes] = raw[i * tile_row_bytes:(i + 1) * tile_row_bytes]


def rle_encode(raw: bytes) -> bytes:
    """Run-length encode RGB pixels as (count u16 BE, r, g, b) runs."""
    out = bytearray()
    n = len(raw) // 3
    i = 0
    while i < n:
        r = raw[3 * i]
        g = raw[3 * i + 1]
        b = raw[3 * i + 2]
        run = 1
        j = i + 1
        while j < n and run < 0xFFFF and raw[3 * j] == r and raw[3 * j + 1] == g and raw[3 * j + 2] == b:
            run += 1
            j += 1
        out += bytes((run >> 8, run & 0xFF, r, g, b))
        i = j
    return bytes(out)


def rle_decode(payload: bytes, out_len: int) -> bytes:
    if len(payload) % 5 != 0:
        raise ValueError(f"RLE payload length {len(payload)} not a multiple of 5")
    out = bytearray()
    for k in range(0, len(payload), 5):
        run = (payload[k] << 8) | payload[k + 1]
        out += payload[k + 2:k + 5] * run
        if len(out) > out_len:
            raise ValueError("RLE payload overruns tile")
    if len(out) != out_len:
        raise ValueError(f"RLE payload decodes to {len(out)} bytes, want {out_len}")
    return bytes(out)
