"""Thin-client wire protocol: input events, framebuffers, tile diffs.

All multi-byte integers on the wire are big-endian.  The tile-diff and
RLE kernels have a compiled (Cython) implementation with a pure-Python
fallback; see `kernels.KERNEL_BACKEND` for which one is active.
"""

from .events import (
    EventKind,
    InputEvent,
    MalformedEvent,
    decode_input_event,
    encode_input_event,
)
from .framebuffer import Framebuffer
from .kernels import KERNEL_BACKEND
from .tiles import (
    BadTileLength,
    DimensionMismatch,
    DirtyTileSet,
    TileEncoding,
    TileMode,
    TileOutOfBounds,
    apply_update,
    decode_tile,
    diff_framebuffer,
    encode_tile,
    full_frame_update,
)
from .wire import MalformedUpdate, decode_update, encode_update

DEFAULT_TILE = 16

__all__ = [
    "EventKind",
    "InputEvent",
    "MalformedEvent",
    "encode_input_event",
    "decode_input_event",
    "Framebuffer",
    "TileMode",
    "TileEncoding",
    "DirtyTileSet",
    "DimensionMismatch",
    "BadTileLength",
    "TileOutOfBounds",
    "diff_framebuffer",
    "encode_tile",
    "decode_tile",
    "apply_update",
    "full_frame_update",
    "encode_update",
    "decode_update",
    "MalformedUpdate",
    "KERNEL_BACKEND",
    "DEFAULT_TILE",
]
