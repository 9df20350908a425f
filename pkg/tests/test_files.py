"""Tests for image codecs and file utilities."""

import struct

import numpy as np
import pytest

from patchy.codecs import PNGCodec, RawF32Codec
from patchy.codecs.raw import MAGIC
from patchy.core.schema import ImageGrid
from patchy.errors import FormatError, ImageIOError, RangeError
from patchy.files import (
    SUPPORTED_EXTENSIONS,
    detect_format,
    get_codec,
    is_supported,
    load_directory,
    load_image,
    save_image,
)


def make_grid(height: int = 8, width: int = 6, channels: int = 1, seed: int = 0) -> ImageGrid:
    """Helper to create a grid of float32-representable values."""
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(height, width, channels)).astype(np.float32)
    return ImageGrid(data.astype(np.float64))


class TestRawF32Codec:
    """Tests for the raw_f32 container."""

    def test_round_trip_bit_exact(self):
        """Test float32-representable grids round-trip exactly."""
        codec = RawF32Codec()
        grid = make_grid(channels=3)
        assert codec.decode(codec.encode(grid)) == grid

    def test_header_layout(self):
        """Test magic and little-endian dimensions."""
        payload = RawF32Codec().encode(make_grid(height=5, width=7, channels=2))
        assert payload[:4] == MAGIC
        assert struct.unpack("<III", payload[4:16]) == (5, 7, 2)
        assert len(payload) == 16 + 5 * 7 * 2 * 4

    def test_channel_innermost(self):
        """Test samples are row-major with the channel innermost."""
        data = np.arange(12.0).reshape(2, 3, 2)
        payload = RawF32Codec().encode(ImageGrid(data))
        body = np.frombuffer(payload[16:], dtype="<f4")
        assert body.tolist() == list(range(12))

    def test_rounds_to_float32(self):
        """Test float64 values are rounded to the nearest float32."""
        codec = RawF32Codec()
        grid = ImageGrid(np.array([[0.1, 1.0 / 3.0]]))
        decoded = codec.decode(codec.encode(grid))
        assert np.array_equal(decoded.data, grid.data.astype(np.float32).astype(np.float64))

    def test_bad_magic(self):
        """Test a wrong magic is a format error."""
        payload = bytearray(RawF32Codec().encode(make_grid()))
        payload[:4] = b"NOPE"
        with pytest.raises(FormatError):
            RawF32Codec().decode(bytes(payload))

    def test_truncated(self):
        """Test short headers and bodies are format errors."""
        payload = RawF32Codec().encode(make_grid())
        with pytest.raises(FormatError):
            RawF32Codec().decode(payload[:10])
        with pytest.raises(FormatError):
            RawF32Codec().decode(payload[:-4])

    def test_zero_dimension(self):
        """Test a header with a zero dimension is rejected."""
        with pytest.raises(FormatError):
            RawF32Codec().decode(struct.pack("<4sIII", MAGIC, 0, 4, 1))

    def test_nan_body(self):
        """Test non-finite samples are rejected."""
        payload = struct.pack("<4sIII", MAGIC, 1, 1, 1) + np.array([np.nan], "<f4").tobytes()
        with pytest.raises(FormatError):
            RawF32Codec().decode(payload)

    def test_out_of_float32_range(self):
        """Test values beyond float32 cannot be written."""
        with pytest.raises(RangeError):
            RawF32Codec().encode(ImageGrid(np.array([[1e39]])))


class TestPNGCodec:
    """Tests for the PNG codecs."""

    def test_png8_round_trip(self):
        """Test 8-bit codes read back unchanged."""
        codec = PNGCodec(bits=8)
        grid = ImageGrid(np.arange(256.0).reshape(16, 16))
        decoded = codec.decode(codec.encode(grid))
        assert decoded == grid
        assert codec.name == "png8"

    def test_png16_round_trip(self):
        """Test 16-bit codes read back unchanged."""
        codec = PNGCodec(bits=16)
        grid = ImageGrid(np.linspace(0, 65535, 64).round().reshape(8, 8))
        assert codec.decode(codec.encode(grid)) == grid

    def test_out_of_range(self):
        """Test values outside the code range are rejected."""
        with pytest.raises(RangeError):
            PNGCodec(bits=8).encode(ImageGrid(np.array([[0.0, 256.0]])))
        with pytest.raises(RangeError):
            PNGCodec(bits=16).encode(ImageGrid(np.array([[-1.0, 0.0]])))

    def test_multichannel_rejected(self):
        """Test PNG holds one channel only."""
        with pytest.raises(FormatError):
            PNGCodec().encode(ImageGrid(np.zeros((2, 2, 3))))

    def test_corrupt_payload(self):
        """Test garbage bytes are a format error."""
        with pytest.raises(FormatError):
            PNGCodec().decode(b"not a png at all")

    def test_bit_depth_mismatch(self):
        """Test a 16-bit file is rejected by the 8-bit codec."""
        payload = PNGCodec(bits=16).encode(ImageGrid(np.full((4, 4), 1000.0)))
        with pytest.raises(FormatError):
            PNGCodec(bits=8).decode(payload)

    def test_bad_bits(self):
        """Test only 8 and 16 bits are supported."""
        with pytest.raises(ValueError):
            PNGCodec(bits=12)


class TestFiles:
    """Tests for load_image, save_image and friends."""

    def test_save_and_load_raw(self, tmp_path):
        """Test raw_f32 files by extension."""
        grid = make_grid(channels=2)
        path = tmp_path / "x.raw"
        payload = save_image(grid, path)
        assert path.read_bytes() == payload
        assert load_image(path) == grid

    def test_detect_png_depth(self, tmp_path):
        """Test PNG bit depth is read from the header."""
        save_image(ImageGrid(np.full((4, 4), 7.0)), tmp_path / "a.png", "png8")
        save_image(ImageGrid(np.full((4, 4), 700.0)), tmp_path / "b.png", "png16")
        assert detect_format(tmp_path / "a.png") == "png8"
        assert detect_format(tmp_path / "b.png") == "png16"
        assert load_image(tmp_path / "b.png").data.max() == 700.0

    def test_missing_file(self, tmp_path):
        """Test a missing file is an IO error."""
        with pytest.raises(ImageIOError):
            load_image(tmp_path / "missing.raw")

    def test_unsupported_extension(self, tmp_path):
        """Test unknown extensions are rejected."""
        path = tmp_path / "x.bmp"
        path.write_bytes(b"")
        with pytest.raises(FormatError):
            load_image(path)
        assert not is_supported(path)
        assert ".png" in SUPPORTED_EXTENSIONS

    def test_unknown_format_name(self):
        """Test get_codec rejects unknown names."""
        with pytest.raises(ValueError):
            get_codec("jpeg")

    def test_load_directory_sorted(self, tmp_path):
        """Test directory loading is sorted and skips bad files."""
        save_image(make_grid(seed=2), tmp_path / "b.raw")
        save_image(make_grid(seed=1), tmp_path / "a.raw")
        (tmp_path / "c.raw").write_bytes(b"garbage")
        (tmp_path / "notes.txt").write_text("ignored")

        loaded = load_directory(tmp_path)
        assert [name for name, _ in loaded] == ["a.raw", "b.raw"]
        assert loaded[0][1] == make_grid(seed=1)

    def test_load_directory_missing(self, tmp_path):
        """Test a missing directory is an IO error."""
        with pytest.raises(ImageIOError):
            load_directory(tmp_path / "nope")
