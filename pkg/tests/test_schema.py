"""Tests for core data structures."""

import json

import numpy as np
import pytest

from patchy.core.schema import (
    CorpusManifest,
    ImageGrid,
    NormalizationStats,
    PatchRegion,
    PatchSpec,
    SampleRecord,
    SolverStats,
    content_digest,
)
from patchy.errors import ConstantChannelError, RegionOutOfBoundsError, ShapeMismatchError


def make_record(index: int = 0, status: str = "ok", **kwargs) -> SampleRecord:
    """Helper to create manifest records."""
    spec = PatchSpec(PatchRegion(2, 3, 4, 5), alpha=0.5, dest_index=0, source_index=1)
    defaults = dict(
        index=index,
        status=status,
        dest_file="a.png",
        source_file="b.png",
        spec=spec,
        rng_stream_id=12345678901234567890,
    )
    if status == "ok":
        defaults.update(
            image_file=f"{index:06d}_img.raw",
            label_file=f"{index:06d}_lbl.raw",
            image_digest="0123456789abcdef",
            label_digest="fedcba9876543210",
            output_min=-1.5,
            output_max=2.0,
        )
    defaults.update(kwargs)
    return SampleRecord(**defaults)


def make_manifest(records=()) -> CorpusManifest:
    return CorpusManifest(
        tool_version="0.1.0",
        rng="PCG64",
        master_seed=1234,
        mode="pii",
        normalize=True,
        image_shape=(32, 32, 1),
        sampler_config={"seed": 1234},
        solver_config={"rel_tolerance": 1e-8},
        inputs=("a.png", "b.png"),
        records=tuple(records),
    )


class TestImageGrid:
    """Tests for ImageGrid."""

    def test_promotes_2d(self):
        """Test a 2-D array becomes one channel."""
        grid = ImageGrid.from_array([[1, 2, 3], [4, 5, 6]])
        assert grid.shape == (2, 3, 1)
        assert grid.data.dtype == np.float64

    def test_read_only_copy(self):
        """Test the grid owns a read-only copy of its data."""
        source = np.zeros((4, 4))
        grid = ImageGrid(source)
        source[0, 0] = 9.0
        assert grid.data[0, 0, 0] == 0.0
        with pytest.raises(ValueError):
            grid.data[0, 0, 0] = 1.0

    def test_to_array_is_writeable(self):
        """Test to_array returns an independent copy."""
        grid = ImageGrid(np.ones((3, 3)))
        arr = grid.to_array()
        arr[0, 0, 0] = 5.0
        assert grid.data[0, 0, 0] == 1.0

    def test_rejects_non_finite(self):
        """Test NaN and Inf are rejected."""
        with pytest.raises(ValueError):
            ImageGrid(np.array([[0.0, np.nan]]))
        with pytest.raises(ValueError):
            ImageGrid(np.array([[np.inf, 0.0]]))

    def test_rejects_bad_rank(self):
        """Test 1-D and 4-D arrays are rejected."""
        with pytest.raises(ValueError):
            ImageGrid(np.zeros(5))
        with pytest.raises(ValueError):
            ImageGrid(np.zeros((2, 2, 2, 2)))

    def test_equality(self):
        """Test equality compares contents."""
        a = ImageGrid(np.arange(6.0).reshape(2, 3))
        b = ImageGrid(np.arange(6.0).reshape(2, 3))
        assert a == b
        assert hash(a) == hash(b)
        assert a != ImageGrid(np.zeros((2, 3)))

    def test_transpose(self):
        """Test transpose swaps rows and columns of every channel."""
        data = np.arange(24.0).reshape(2, 3, 4)
        grid = ImageGrid(data).transpose()
        assert grid.shape == (3, 2, 4)
        assert np.array_equal(grid.data, data.transpose(1, 0, 2))

    def test_check_same_shape(self):
        """Test shape mismatch raises."""
        with pytest.raises(ShapeMismatchError):
            ImageGrid(np.zeros((2, 2))).check_same_shape(ImageGrid(np.zeros((2, 3))))


class TestNormalizationStats:
    """Tests for NormalizationStats."""

    def test_zero_std_rejected(self):
        """Test a zero std is a constant channel."""
        with pytest.raises(ConstantChannelError):
            NormalizationStats(mean=(1.0,), std=(0.0,))

    def test_to_dict(self):
        """Test dict conversion."""
        stats = NormalizationStats(mean=(1.0, 2.0), std=(0.5, 3.0))
        assert stats.channels == 2
        assert stats.to_dict() == {"mean": [1.0, 2.0], "std": [0.5, 3.0]}


class TestPatchRegion:
    """Tests for PatchRegion."""

    def test_bounds(self):
        """Test exclusive bottom/right and pixel count."""
        region = PatchRegion(top=2, left=3, height=4, width=5)
        assert region.bottom == 6
        assert region.right == 8
        assert region.pixel_count == 20

    def test_ring_must_fit(self):
        """Test the one-pixel ring must stay inside the image."""
        region = PatchRegion(top=1, left=1, height=6, width=6)
        assert region.fits(8, 8)
        assert not region.fits(7, 8)
        with pytest.raises(RegionOutOfBoundsError):
            region.check_fits(8, 7)

    def test_touching_border_rejected(self):
        """Test a region on row or column 0 has no ring."""
        with pytest.raises(RegionOutOfBoundsError):
            PatchRegion(top=0, left=1, height=2, width=2)
        with pytest.raises(RegionOutOfBoundsError):
            PatchRegion(top=1, left=0, height=2, width=2)

    def test_empty_rejected(self):
        """Test zero-sized regions are rejected."""
        with pytest.raises(RegionOutOfBoundsError):
            PatchRegion(top=1, left=1, height=0, width=2)

    def test_inside(self):
        """Test inside() checks the image size."""
        assert PatchRegion.inside(1, 1, 3, 3, 5, 5).pixel_count == 9
        with pytest.raises(RegionOutOfBoundsError):
            PatchRegion.inside(1, 1, 4, 3, 5, 5)

    def test_mask(self):
        """Test the mask covers exactly the region."""
        mask = PatchRegion(2, 3, 4, 5).mask(10, 10)
        assert mask.sum() == 20
        assert mask[2, 3] and mask[5, 7]
        assert not mask[1, 3] and not mask[2, 8]

    def test_dict_round_trip(self):
        """Test dict conversion keeps all fields."""
        region = PatchRegion(2, 3, 4, 5)
        assert PatchRegion.from_dict(region.to_dict()) == region

    def test_transpose(self):
        """Test transpose swaps axes."""
        assert PatchRegion(2, 3, 4, 5).transpose() == PatchRegion(3, 2, 5, 4)


class TestPatchSpec:
    """Tests for PatchSpec."""

    def test_alpha_range(self):
        """Test alpha outside [0, 1] is rejected."""
        region = PatchRegion(1, 1, 2, 2)
        PatchSpec(region, 0.0)
        PatchSpec(region, 1.0)
        with pytest.raises(ValueError):
            PatchSpec(region, 1.5)
        with pytest.raises(ValueError):
            PatchSpec(region, -0.1)

    def test_indices_must_differ(self):
        """Test source and destination cannot be the same image."""
        with pytest.raises(ValueError):
            PatchSpec(PatchRegion(1, 1, 2, 2), 0.5, dest_index=3, source_index=3)

    def test_with_indices(self):
        """Test with_indices returns a new paired spec."""
        spec = PatchSpec(PatchRegion(1, 1, 2, 2), 0.5)
        paired = spec.with_indices(0, 4)
        assert spec.dest_index is None
        assert (paired.dest_index, paired.source_index) == (0, 4)


class TestContentDigest:
    """Tests for content_digest."""

    def test_stable(self):
        """Test the digest is deterministic and 16 hex characters."""
        assert content_digest(b"abc") == content_digest(b"abc")
        assert len(content_digest(b"abc")) == 16
        assert content_digest(b"abc") != content_digest(b"abd")


class TestCorpusManifest:
    """Tests for CorpusManifest."""

    def test_json_round_trip(self):
        """Test a manifest survives JSON serialization."""
        failed = make_record(
            1, status="failed", error="no convergence", solver_stats=SolverStats(1e-3, 50)
        )
        manifest = make_manifest([make_record(0), failed])
        restored = CorpusManifest.from_json(manifest.to_json())
        assert restored == manifest
        assert restored.records[0].rng_stream_id == 12345678901234567890

    def test_stable_key_order(self):
        """Test JSON keys are sorted."""
        data = json.loads(make_manifest([make_record(0)]).to_json())
        assert list(data) == sorted(data)

    def test_statistics(self):
        """Test counts and overshoot statistics."""
        records = [
            make_record(0, output_min=-2.0, output_max=1.0),
            make_record(1, output_min=-1.0, output_max=3.0, overshoot=True),
            make_record(2, status="failed", error="x"),
        ]
        stats = make_manifest(records).to_dict()["statistics"]
        assert stats == {
            "requested": 3,
            "failed": 1,
            "output_min": -2.0,
            "output_max": 3.0,
            "overshoot_samples": 1,
        }

    def test_output_files(self):
        """Test failed records claim no files."""
        manifest = make_manifest([make_record(0), make_record(1, status="failed", error="x")])
        assert manifest.output_files() == {"000000_img.raw", "000000_lbl.raw"}
        assert [r.index for r in manifest.failed] == [1]

    def test_empty_manifest(self):
        """Test a corpus of zero samples."""
        stats = make_manifest().to_dict()["statistics"]
        assert stats["requested"] == 0
        assert stats["output_min"] is None

    def test_to_pydantic(self):
        """Test conversion to Pydantic model."""
        pytest.importorskip("pydantic")
        model = make_manifest([make_record(0)]).to_pydantic()
        assert model.master_seed == 1234
        assert model.records[0].image_file == "000000_img.raw"
