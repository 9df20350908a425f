"""
Codec protocol and base classes.

Defines the interface for image file formats, so the file utilities can
read and write any format through one call.
"""

from __future__ import annotations

from pathlib import Path
from typing import Protocol, runtime_checkable

from patchy.core.schema import ImageGrid
from patchy.errors import ImageIOError


@runtime_checkable
class ImageCodec(Protocol):
    """
    Protocol for image codecs - any class with these members works.

    Example:
        class NpyCodec:
            name = "npy"

            def decode(self, payload: bytes) -> ImageGrid:
                return ImageGrid.from_array(np.load(io.BytesIO(payload)))

            def encode(self, image: ImageGrid) -> bytes:
                buf = io.BytesIO()
                np.save(buf, image.data)
                return buf.getvalue()
    """

    @property
    def name(self) -> str:
        """Format identifier (e.g. 'png8', 'raw_f32')."""
        ...

    def decode(self, payload: bytes) -> ImageGrid:
        """
        Decode a file payload.

        Raises:
            FormatError: If the payload does not parse under this format
        """
        ...

    def encode(self, image: ImageGrid) -> bytes:
        """
        Encode a grid to a file payload.

        Raises:
            RangeError: If values cannot be represented in this format
        """
        ...


class BaseCodec:
    """
    Base class with file helpers for codecs.

    Subclasses override decode() and encode().
    """

    _name: str = "base"

    @property
    def name(self) -> str:
        return self._name

    def decode(self, payload: bytes) -> ImageGrid:
        raise NotImplementedError("Subclass must implement decode()")

    def encode(self, image: ImageGrid) -> bytes:
        raise NotImplementedError("Subclass must implement encode()")

    def read(self, path: str | Path) -> ImageGrid:
        """Read and decode a file."""
        try:
            payload = Path(path).read_bytes()
        except OSError as exc:
            raise ImageIOError(f"Cannot read {path}: {exc}") from exc
        return self.decode(payload)

    def write(self, image: ImageGrid, path: str | Path) -> bytes:
        """Encode and write a file; returns the bytes written."""
        payload = self.encode(image)
        try:
            Path(path).write_bytes(payload)
        except OSError as exc:
            raise ImageIOError(f"Cannot write {path}: {exc}") from exc
        return payload
