from __future__ import annotations

import hashlib
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Framebuffer:
    """Row-major RGB framebuffer, 3 bytes per pixel."""

    width: int
    height: int
    pixels: bytes = field(repr=False)

    def __post_init__(self) -> None:
        expect = self.width * self.height * 3
        if len(self.pixels) != expect:
            raise ValueError(
                f"pixel array length {len(self.pixels)} != {self.width}x{self.height}x3"
            )

    @classmethod
    def blank(cls, width: int, height: int, color: tuple[int, int, int] = (0, 0, 0)) -> "Framebuffer":
        return cls(width, height, bytes(color) * (width * height))

    def digest(self) -> str:
        return hashlib.sha256(self.pixels).hexdigest()
