"""
Grayscale PNG codecs (8- and 16-bit) backed by Pillow.

Integer codes map to reals exactly, with no rescaling: code 255 reads
as 255.0. Callers rescale before writing.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image, UnidentifiedImageError

from patchy.codecs.base import BaseCodec
from patchy.core.schema import ImageGrid
from patchy.errors import FormatError, RangeError

# Pillow mode names for 16-bit grayscale differ between versions
_MODES_16 = {"I;16", "I;16L", "I;16B", "I"}


class PNGCodec(BaseCodec):
    """
    Single-channel PNG at a fixed bit depth.

    Example:
        codec = PNGCodec(bits=16)
        grid = codec.read("scan.png")   # values 0.0 .. 65535.0
    """

    def __init__(self, bits: int = 8) -> None:
        """
        Args:
            bits: 8 or 16
        """
        if bits not in (8, 16):
            raise ValueError(f"PNG bit depth must be 8 or 16, got {bits}")
        self.bits = bits
        self._name = f"png{bits}"
        self.max_code = (1 << bits) - 1

    def decode(self, payload: bytes) -> ImageGrid:
        try:
            with Image.open(io.BytesIO(payload)) as img:
                img.load()
                if img.format != "PNG":
                    raise FormatError(f"Not a PNG file (found {img.format})")
                mode = img.mode
                codes = np.array(img)
        except (UnidentifiedImageError, OSError, SyntaxError) as exc:
            raise FormatError(f"Corrupt PNG: {exc}") from exc

        if self.bits == 8 and mode != "L":
            raise FormatError(f"Expected 8-bit grayscale PNG (mode L), found mode {mode}")
        if self.bits == 16 and mode not in _MODES_16:
            raise FormatError(f"Expected 16-bit grayscale PNG, found mode {mode}")
        return ImageGrid(codes.astype(np.float64))

    def encode(self, image: ImageGrid) -> bytes:
        if image.channels != 1:
            raise FormatError(f"PNG holds one channel, image has {image.channels}")
        data = image.channel(0)
        lo, hi = float(data.min()), float(data.max())
        if lo < 0 or hi > self.max_code:
            raise RangeError(
                f"{self.name} holds codes 0..{self.max_code}, image spans [{lo}, {hi}]"
            )
        codes = np.rint(data)
        if self.bits == 8:
            img = Image.fromarray(codes.astype(np.uint8))
        else:
            img = Image.fromarray(codes.astype(np.uint16))
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        return buf.getvalue()


def png_bit_depth(payload: bytes) -> int:
    """Bit depth of a PNG from its IHDR chunk (byte 24)."""
    if len(payload) < 25 or payload[:8] != b"\x89PNG\r\n\x1a\n":
        raise FormatError("Not a PNG file")
    return int(payload[24])
