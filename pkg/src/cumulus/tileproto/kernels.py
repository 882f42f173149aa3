"""Kernel backend selection.

The compiled extension is preferred; set CUMULUS_PURE_PYTHON=1 to force
the pure-Python implementation (used by the benchmark and CI sanity runs).
"""

from __future__ import annotations

import os

if os.environ.get("CUMULUS_PURE_PYTHON") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

KERNEL_BACKEND: str = _impl.BACKEND

dirty_tiles = _impl.dirty_tiles
extract_tile = _impl.extract_tile
blit_tile = _impl.blit_tile
rle_encode = _impl.rle_encode
rle_decode = _impl.rle_decode
