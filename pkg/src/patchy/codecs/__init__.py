"""Image file codecs: grayscale PNG and the raw_f32 container."""

from patchy.codecs.base import BaseCodec, ImageCodec
from patchy.codecs.png import PNGCodec
from patchy.codecs.raw import RawF32Codec

__all__ = [
    "ImageCodec",
    "BaseCodec",
    "PNGCodec",
    "RawF32Codec",
]
