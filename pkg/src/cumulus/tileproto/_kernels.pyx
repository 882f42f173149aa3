# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tile kernels: diff, extract/blit, RLE codec."""

from libc.string cimport memcmp, memcpy

BACKEND = "cython"


def dirty_tiles(bytes prev, bytes nxt, int width, int height, int tile):
    cdef const unsigned char* p = prev
    cdef const unsigned char* q = nxt
    cdef int cols = width // tile
    cdef int rows = height // tile
    cdef int stride = width * 3
    cdef int trb = tile * 3
    cdef int tr, tc, y, off
    cdef bint differs
    out = []
    if memcmp(p, q, <size_t>(stride * height)) == 0:
        return out
    for tr in range(rows):
        if memcmp(p + tr * tile * stride, q + tr * tile * stride,
                  <size_t>(tile * stride)) == 0:
            continue
        for tc in range(cols):
            differs = False
            for y in range(tr * tile, (tr + 1) * tile):
                off = y * stride + tc * trb
                if memcmp(p + off, q + off, <size_t>trb) != 0:
                    differs = True
                    break
            if differs:
                out.append((tc, tr))
    return out


def extract_tile(bytes pixels, int width, int tile, int col, int row):
    cdef const unsigned char* src = pixels
    cdef int stride = width * 3
    cdef int trb = tile * 3
    cdef bytearray out = bytearray(tile * trb)
    cdef unsigned char* dst = out
    cdef int i, y
    for i in range(tile):
        y = row * tile + i
        memcpy(dst + i * trb, src + y * stride + col * trb, <size_t>trb)
    return bytes(out)


def blit_tile(bytearray pixels, int width, int tile, int col, int row, bytes raw):
    cdef unsigned char* dst = pixels
    cdef const unsigned char* src = raw
    cdef int stride = width * 3
    cdef int trb = tile * 3
    cdef int i, y
    for i in range(tile):
        y = row * tile + i
        memcpy(dst + y * stride + col * trb, src + i * trb, <size_t>trb)


def rle_encode(bytes raw):
    cdef const unsigned char* src = raw
    cdef int n = len(raw) // 3
    cdef bytearray out = bytearray()
    cdef int i = 0, j, run
    cdef unsigned char r, g, b
    while i < n:
        r = src[3 * i]
        g = src[3 * i + 1]
        b = src[3 * i + 2]
        run = 1
        j = i + 1
        while j < n and run < 0xFFFF and src[3 * j] == r and src[3 * j + 1] == g and src[3 * j + 2] == b:
            run += 1
            j += 1
        out.append(run >> 8)
        out.append(run & 0xFF)
        out.append(r)
        out.append(g)
        out.append(b)
        i = j
    return bytes(out)


def rle_decode(bytes payload, int out_len):
    cdef const unsigned char* src = payload
    cdef int plen = len(payload)
    if plen % 5 != 0:
        raise ValueError(f"RLE payload length {plen} not a multiple of 5")
    cdef bytearray out = bytearray(out_len)
    cdef unsigned char* dst = out
    cdef int k, run, t
    cdef int pos = 0
    for k in range(0, plen, 5):
        run = (src[k] << 8) | src[k + 1]
        if pos + run * 3 > out_len:
            raise ValueError("RLE payload overruns tile")
        for t in range(run):
            dst[pos] = src[k + 2]
            dst[pos + 1] = src[k + 3]
            dst[pos + 2] = src[k + 4]
            pos += 3
    if pos != out_len:
        raise ValueError(f"RLE payload decodes to {pos} bytes, want {out_len}")
    return bytes(out)
