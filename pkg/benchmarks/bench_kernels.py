#!/usr/bin/env python3
"""Benchmark the tile kernels: compiled extension vs pure Python.

Usage: python3 benchmarks/bench_kernels.py [--frames N] [--size WxH]

Runs diff + encode + apply over synthetic frame sequences with both
backends and prints per-frame timings and the speedup.
"""

import argparse
import random
import time

from cumulus.tileproto import Framebuffer, apply_update, diff_framebuffer
from cumulus.tileproto import _kernels_py

try:
    from cumulus.tileproto import _kernels
except ImportError:
    _kernels = None


def make_sequence(rng, width, height, frames, dirty_pixels):
    fbs = [Framebuffer.blank(width, height)]
    for _ in range(frames):
        pixels = bytearray(fbs[-1].pixels)
        for _ in range(dirty_pixels):
            i = rng.randrange(width * height) * 3
            pixels[i:i + 3] = rng.randbytes(3)
        fbs.append(Framebuffer(width, height, bytes(pixels)))
    return fbs


def run(backend, fbs, tile):
    import cumulus.tileproto.kernels as kernels

    saved = (kernels.dirty_tiles, kernels.extract_tile, kernels.blit_tile,
             kernels.rle_encode, kernels.rle_decode)
    kernels.dirty_tiles = backend.dirty_tiles
    kernels.extract_tile = backend.extract_tile
    kernels.blit_tile = backend.blit_tile
    kernels.rle_encode = backend.rle_encode
    kernels.rle_decode = backend.rle_decode
    try:
        start = time.perf_counter()
        fb = fbs[0]
        for nxt in fbs[1:]:
            update = diff_framebuffer(fb, nxt, tile)
            fb = apply_update(fb, update)
        elapsed = time.perf_counter() - start
        assert fb.pixels == fbs[-1].pixels
        return elapsed
    finally:
        (kernels.dirty_tiles, kernels.extract_tile, kernels.blit_tile,
         kernels.rle_encode, kernels.rle_decode) = saved


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--frames", type=int, default=60)
    parser.add_argument("--size", default="640x480")
    parser.add_argument("--dirty-pixels", type=int, default=2000)
    parser.add_argument("--tile", type=int, default=16)
    args = parser.parse_args()
    width, height = (int(v) for v in args.size.split("x"))

    rng = random.Random(42)
    fbs = make_sequence(rng, width, height, args.frames, args.dirty_pixels)
    print(f"{args.frames} frames of {width}x{height}, "
          f"{args.dirty_pixels} dirty pixels/frame, tile {args.tile}")

    py = run(_kernels_py, fbs, args.tile)
    print(f"  python backend: {py:.3f}s total, {1000 * py / args.frames:.2f} ms/frame")
    if _kernels is None:
        print("  cython backend: not built (pip install -e . --no-build-isolation)")
        return
    cy = run(_kernels, fbs, args.tile)
    print(f"  cython backend: {cy:.3f}s total, {1000 * cy / args.frames:.2f} ms/frame")
    print(f"  speedup: {py / cy:.1f}x")


if __name__ == "__main__":
    main()
