"""
raw_f32 container: a 16-byte header followed by little-endian float32 samples.

Layout:
    magic    4 bytes  b"PIIG"
    height   u32 little-endian
    width    u32 little-endian
    channels u32 little-endian
    data     height*width*channels float32 little-endian, row-major, channel innermost
"""

from __future__ import annotations

import struct

import numpy as np

from patchy.codecs.base import BaseCodec
from patchy.core.schema import ImageGrid
from patchy.errors import FormatError, RangeError

MAGIC = b"PIIG"
HEADER = struct.Struct("<4sIII")
SAMPLE_DTYPE = np.dtype("<f4")

_F32_MAX = float(np.finfo(np.float32).max)


class RawF32Codec(BaseCodec):
    """
    Bit-exact float32 container.

    Values are rounded to the nearest float32 on write; any grid read from a
    raw_f32 file therefore round-trips bit-identically.

    Example:
        codec = RawF32Codec()
        payload = codec.encode(grid)
        assert codec.decode(payload) == grid  # when grid came from a raw_f32 file
    """

    _name: str = "raw_f32"

    def decode(self, payload: bytes) -> ImageGrid:
        if len(payload) < HEADER.size:
            raise FormatError(f"raw_f32 payload too short for header ({len(payload)} bytes)")
        magic, height, width, channels = HEADER.unpack_from(payload, 0)
        if magic != MAGIC:
            raise FormatError(f"Bad raw_f32 magic {magic!r}, expected {MAGIC!r}")
        if min(height, width, channels) < 1:
            raise FormatError(f"Bad raw_f32 shape {height}x{width}x{channels}")

        expected = height * width * channels * SAMPLE_DTYPE.itemsize
        body = len(payload) - HEADER.size
        if body != expected:
            raise FormatError(
                f"raw_f32 header declares {height}x{width}x{channels} "
                f"({expected} bytes) but body has {body} bytes"
            )
        data = np.frombuffer(payload, dtype=SAMPLE_DTYPE, offset=HEADER.size)
        try:
            return ImageGrid(data.reshape(height, width, channels))
        except ValueError as exc:
            raise FormatError(f"raw_f32 body rejected: {exc}") from exc

    def encode(self, image: ImageGrid) -> bytes:
        if np.abs(image.data).max() > _F32_MAX:
            raise RangeError("Values exceed the float32 range")
        header = HEADER.pack(MAGIC, image.height, image.width, image.channels)
        return header + image.data.astype(SAMPLE_DTYPE).tobytes(order="C")
