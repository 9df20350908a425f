"""
Unified image file utilities.

Detects the format from the file extension (and, for PNG, the bit depth
in the header) and applies the matching codec.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal

from patchy.codecs.base import BaseCodec
from patchy.codecs.png import PNGCodec, png_bit_depth
from patchy.codecs.raw import RawF32Codec
from patchy.core.schema import ImageGrid
from patchy.errors import FormatError, ImageIOError

logger = logging.getLogger(__name__)

ImageFormat = Literal["png8", "png16", "raw_f32"]

FORMATS: tuple[str, ...] = ("png8", "png16", "raw_f32")

# File extension to format family mapping
EXTENSION_FORMATS = {
    ".png": "png",
    ".raw": "raw_f32",
    ".piig": "raw_f32",
    ".f32": "raw_f32",
}


def get_codec(format: str) -> BaseCodec:
    """
    Create a codec by format name.

    Raises:
        ValueError: If the format is unknown
    """
    if format == "png8":
        return PNGCodec(bits=8)
    elif format == "png16":
        return PNGCodec(bits=16)
    elif format == "raw_f32":
        return RawF32Codec()
    else:
        raise ValueError(f"Unknown image format: {format!r} (expected one of {FORMATS})")


def detect_format(path: str | Path) -> str:
    """
    Infer the format of an existing file.

    PNG files report png8 or png16 from their header; raw containers by extension.

    Raises:
        FormatError: If the extension is not supported
    """
    path = Path(path)
    family = EXTENSION_FORMATS.get(path.suffix.lower())
    if family is None:
        raise FormatError(f"Unsupported image extension: {path.suffix!r}")
    if family != "png":
        return family
    try:
        with open(path, "rb") as f:
            head = f.read(32)
    except OSError as exc:
        raise ImageIOError(f"Cannot read {path}: {exc}") from exc
    return "png16" if png_bit_depth(head) == 16 else "png8"


def format_for_output(path: str | Path) -> str:
    """Format used when writing to path and no format is given (PNG means png8)."""
    family = EXTENSION_FORMATS.get(Path(path).suffix.lower())
    if family is None:
        raise FormatError(f"Unsupported image extension: {Path(path).suffix!r}")
    return "png8" if family == "png" else family


def load_image(path: str | Path, format: ImageFormat | str | None = None) -> ImageGrid:
    """
    Load an image file.

    Args:
        path: File to read
        format: "png8", "png16" or "raw_f32"; detected from the file if None

    Returns:
        ImageGrid with float64 intensities (PNG codes are not rescaled)

    Raises:
        ImageIOError: If the file cannot be read
        FormatError: If it does not parse under the format

    Example:
        >>> grid = load_image("scan.png")
        >>> grid = load_image("sample_000001_img.raw", format="raw_f32")
    """
    path = Path(path)
    if not path.exists():
        raise ImageIOError(f"File not found: {path}")
    codec = get_codec(format or detect_format(path))
    return codec.read(path)


def save_image(
    image: ImageGrid, path: str | Path, format: ImageFormat | str | None = None
) -> bytes:
    """
    Write an image file.

    Args:
        image: Grid to write
        path: Destination file
        format: "png8", "png16" or "raw_f32"; from the extension if None

    Returns:
        The bytes written

    Raises:
        ImageIOError: If the file cannot be written
        RangeError: If values do not fit the format
    """
    codec = get_codec(format or format_for_output(path))
    return codec.write(image, path)


def is_supported(path: str | Path) -> bool:
    """Check if a file extension is a supported image format."""
    return Path(path).suffix.lower() in EXTENSION_FORMATS


def load_directory(
    directory: str | Path,
    format: ImageFormat | str | None = None,
    pattern: str = "*",
) -> list[tuple[str, ImageGrid]]:
    """
    Load every supported image in a directory (not recursive).

    Files are returned sorted by name, so dataset indices are stable.
    Files that fail to load are skipped with a warning.

    Args:
        directory: Directory path
        format: Force one format instead of detecting per file
        pattern: Glob pattern for file matching

    Returns:
        List of (file name, ImageGrid)
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ImageIOError(f"Not a directory: {directory}")

    images: list[tuple[str, ImageGrid]] = []
    for path in sorted(directory.glob(pattern)):
        if not (path.is_file() and is_supported(path)):
            continue
        try:
            images.append((path.name, load_image(path, format)))
        except (FormatError, ImageIOError, ValueError) as exc:
            logger.warning("Skipping %s: %s", path.name, exc)
    return images


SUPPORTED_EXTENSIONS = list(EXTENSION_FORMATS.keys())
