import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cumulus.tileproto import (
    BadTileLength,
    DimensionMismatch,
    Framebuffer,
    TileMode,
    TileOutOfBounds,
    apply_update,
    decode_tile,
    decode_update,
    diff_framebuffer,
    encode_tile,
    encode_update,
    full_frame_update,
)
from cumulus.tileproto.tiles import DirtyTileSet, TileEncoding


def oracle_dirty_tiles(prev: Framebuffer, nxt: Framebuffer, tile: int):
    """Per-pixel brute force: a tile is dirty iff any pixel in it differs."""
    dirty = set()
    for y in range(prev.height):
        for x in range(prev.width):
            off = (y * prev.width + x) * 3
            if prev.pixels[off:off + 3] != nxt.pixels[off:off + 3]:
                dirty.add((x // tile, y // tile))
    return dirty


def random_frame(rng, w, h):
    return Framebuffer(w, h, rng.randbytes(w * h * 3))


def mutate(rng, fb, npix):
    pixels = bytearray(fb.pixels)
    for _ in range(npix):
        i = rng.randrange(fb.width * fb.height) * 3
        pixels[i:i + 3] = rng.randbytes(3)
    return Framebuffer(fb.width, fb.height, bytes(pixels))


def test_identical_frames_empty_diff():
    fb = Framebuffer.blank(64, 64)
    assert len(diff_framebuffer(fb, fb, 16)) == 0


def test_single_pixel_dirty_tile():
    prev = Framebuffer.blank(64, 64)
    pixels = bytearray(prev.pixels)
    off = (20 * 64 + 20) * 3
    pixels[off] = 255
    nxt = Framebuffer(64, 64, bytes(pixels))
    update = diff_framebuffer(prev, nxt, 16)
    assert [(c, r) for c, r, _ in update.tiles] == [(1, 1)]


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        diff_framebuffer(Framebuffer.blank(64, 64), Framebuffer.blank(32, 32), 16)


def test_diff_matches_bruteforce_oracle():
    rng = random.Random(1234)
    for _ in range(50):
        prev = random_frame(rng, 64, 64)
        nxt = mutate(rng, prev, rng.randrange(0, 40))
        update = diff_framebuffer(prev, nxt, 16)
        assert {(c, r) for c, r, _ in update.tiles} == oracle_dirty_tiles(prev, nxt, 16)
        assert apply_update(prev, update).pixels == nxt.pixels


def test_uniform_tile_rle():
    raw = bytes((9, 9, 9)) * 256
    enc = encode_tile(raw, 16)
    assert enc.mode is TileMode.RLE
    assert enc.payload == bytes((0x01, 0x00, 9, 9, 9))
    assert decode_tile(enc, 16) == raw


def test_alternating_tile_raw():
    raw = (bytes((1, 2, 3)) + bytes((4, 5, 6))) * 128
    enc = encode_tile(raw, 16)
    assert enc.mode is TileMode.RAW
    assert enc.payload == raw


def test_bad_tile_length():
    with pytest.raises(BadTileLength):
        encode_tile(b"\x00" * 7, 16)


def test_encoding_never_longer_than_raw():
    rng = random.Random(7)
    for _ in range(30):
        raw = rng.randbytes(16 * 16 * 3)
        enc = encode_tile(raw, 16)
        assert len(enc.payload) <= len(raw)
        assert decode_tile(enc, 16) == raw


def test_tile_out_of_bounds():
    fb = Framebuffer.blank(32, 32)
    bad = DirtyTileSet(0, 16, ((5, 0, encode_tile(bytes(768), 16)),))
    with pytest.raises(TileOutOfBounds):
        apply_update(fb, bad)


def test_empty_update_is_identity():
    fb = Framebuffer.blank(64, 64)
    assert apply_update(fb, DirtyTileSet(0, 16, ())).pixels == fb.pixels


def test_full_frame_update_totality():
    rng = random.Random(99)
    prev = random_frame(rng, 64, 64)
    nxt = random_frame(rng, 64, 64)
    assert apply_update(prev, full_frame_update(nxt, 16)).pixels == nxt.pixels


def test_update_wire_round_trip():
    rng = random.Random(5)
    prev = random_frame(rng, 64, 64)
    nxt = mutate(rng, prev, 25)
    update = diff_framebuffer(prev, nxt, 16, frame_seq=42)
    decoded = decode_update(encode_update(update), 16)
    assert decoded == update


def test_update_size_monotone_in_dirty_tiles():
    rng = random.Random(11)
    base = Framebuffer.blank(64, 64)
    sizes = []
    for k in range(0, 16):
        pixels = bytearray(base.pixels)
        # Dirty exactly k distinct tiles with random content.
        for t in range(k):
            col, row = t % 4, t // 4
            for y in range(row * 16, row * 16 + 16):
                off = (y * 64 + col * 16) * 3
                pixels[off:off + 48] = rng.randbytes(48)
        nxt = Framebuffer(64, 64, bytes(pixels))
        sizes.append(len(encode_update(diff_framebuffer(base, nxt, 16))))
    assert sizes == sorted(sizes)


tiles_strategy = st.binary(min_size=768, max_size=768)


@settings(max_examples=50)
@given(tiles_strategy)
def test_tile_codec_round_trip(raw):
    assert decode_tile(encode_tile(raw, 16), 16) == raw


@settings(max_examples=20)
@given(st.binary(min_size=16 * 16 * 3, max_size=16 * 16 * 3),
       st.binary(min_size=16 * 16 * 3, max_size=16 * 16 * 3))
def test_apply_diff_reconstructs(prev_bytes, next_bytes):
    prev = Framebuffer(16, 16, prev_bytes)
    nxt = Framebuffer(16, 16, next_bytes)
    update = diff_framebuffer(prev, nxt, 16)
    assert apply_update(prev, update).pixels == nxt.pixels


def test_kernel_backends_agree():
    from cumulus.tileproto import _kernels_py

    rng = random.Random(21)
    prev = random_frame(rng, 64, 64)
    nxt = mutate(rng, prev, 30)
    py_dirty = _kernels_py.dirty_tiles(prev.pixels, nxt.pixels, 64, 64, 16)
    update = diff_framebuffer(prev, nxt, 16)
    assert sorted((c, r) for c, r, _ in update.tiles) == sorted(py_dirty)
    raw = rng.randbytes(768)
    from cumulus.tileproto import kernels

    assert kernels.rle_encode(raw) == _kernels_py.rle_encode(raw)
