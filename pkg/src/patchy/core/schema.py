"""
Core data structures for patchy.

Defines ImageGrid, PatchRegion, PatchSpec and the corpus records as
immutable dataclasses, with JSON conversion for the corpus manifest
and optional Pydantic conversion.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from patchy.errors import ConstantChannelError, RegionOutOfBoundsError, ShapeMismatchError

if TYPE_CHECKING:
    from patchy.supervision.labels import LabelMap


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """
    A 2-D grid of real intensities with one or more channels.

    Data is held as a read-only float64 array of shape (height, width, channels),
    C-contiguous, so the flat buffer is row-major with the channel innermost.
    A 2-D array is promoted to a single channel.

    Attributes:
        data: float64 array of shape (height, width, channels)
    """
    data: NDArray[np.float64]

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.float64, order="C", copy=True)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ValueError(f"ImageGrid needs a 2-D or 3-D array, got {arr.ndim}-D")
        if min(arr.shape) < 1:
            raise ValueError(f"ImageGrid dimensions must be >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("ImageGrid values must be finite (no NaN/Inf)")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, array: ArrayLike) -> ImageGrid:
        """Build a grid from any array-like of shape (H, W) or (H, W, C)."""
        return cls(np.asarray(array))

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def channels(self) -> int:
        return int(self.data.shape[2])

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.height, self.width, self.channels)

    def to_array(self) -> NDArray[np.float64]:
        """Return a writeable copy of the data."""
        return self.data.copy()

    def channel(self, index: int) -> NDArray[np.float64]:
        """Read-only (height, width) view of one channel."""
        return self.data[:, :, index]

    def transpose(self) -> ImageGrid:
        """Swap rows and columns."""
        return ImageGrid(self.data.transpose(1, 0, 2))

    def check_same_shape(self, other: ImageGrid) -> None:
        """Raise ShapeMismatchError unless other has exactly this shape."""
        if self.shape != other.shape:
            raise ShapeMismatchError(f"Shape mismatch: {self.shape} vs {other.shape}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageGrid):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self) -> int:
        return hash((self.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        return (
            f"ImageGrid(height={self.height}, width={self.width}, "
            f"channels={self.channels}, range=[{self.data.min():.4g}, {self.data.max():.4g}])"
        )


@dataclass(frozen=True)
class NormalizationStats:
    """
    Per-channel statistics removed by normalize().

    Attributes:
        mean: Mean of each channel
        std: Population standard deviation of each channel (always > 0)
    """
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.mean) != len(self.std):
            raise ValueError("mean and std must have one entry per channel")
        for c, s in enumerate(self.std):
            if not s > 0:
                raise ConstantChannelError(f"Channel {c} has std {s}; cannot normalize")

    @property
    def channels(self) -> int:
        return len(self.mean)

    def to_dict(self) -> dict[str, Any]:
        return {"mean": list(self.mean), "std": list(self.std)}


@dataclass(frozen=True)
class PatchRegion:
    """
    An axis-aligned rectangle of pixels h.

    The region's pixels are the unknowns of the Poisson solve; the one-pixel
    ring around it supplies boundary values and must lie inside the
    image, so a valid region keeps a margin of at least one pixel on every side.

    Attributes:
        top: First row
        left: First column
        height: Number of rows (>= 1)
        width: Number of columns (>= 1)
    """
    top: int
    left: int
    height: int
    width: int

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise RegionOutOfBoundsError(
                f"Region must be at least 1x1, got {self.height}x{self.width}"
            )
        if self.top < 1 or self.left < 1:
            raise RegionOutOfBoundsError(
                f"Region at ({self.top}, {self.left}) leaves no boundary ring above/left"
            )

    @classmethod
    def inside(
        cls, top: int, left: int, height: int, width: int, image_height: int, image_width: int
    ) -> PatchRegion:
        """Build a region and check that its boundary ring fits the image."""
        region = cls(top=top, left=left, height=height, width=width)
        region.check_fits(image_height, image_width)
        return region

    @property
    def bottom(self) -> int:
        """One past the last row."""
        return self.top + self.height

    @property
    def right(self) -> int:
        """One past the last column."""
        return self.left + self.width

    @property
    def pixel_count(self) -> int:
        return self.height * self.width

    @property
    def slices(self) -> tuple[slice, slice]:
        """Row and column slices selecting the region."""
        return slice(self.top, self.bottom), slice(self.left, self.right)

    def fits(self, image_height: int, image_width: int) -> bool:
        """True if the region and its boundary ring lie inside the image."""
        return self.bottom <= image_height - 1 and self.right <= image_width - 1

    def check_fits(self, image_height: int, image_width: int) -> None:
        """Raise RegionOutOfBoundsError unless fits()."""
        if not self.fits(image_height, image_width):
            raise RegionOutOfBoundsError(
                f"Region rows {self.top}..{self.bottom - 1}, cols {self.left}..{self.right - 1} "
                f"leaves no boundary ring inside a {image_height}x{image_width} image"
            )

    def mask(self, image_height: int, image_width: int) -> NDArray[np.bool_]:
        """Boolean (height, width) mask of the region."""
        out = np.zeros((image_height, image_width), dtype=bool)
        out[self.slices] = True
        return out

    def transpose(self) -> PatchRegion:
        return PatchRegion(top=self.left, left=self.top, height=self.width, width=self.height)

    def to_dict(self) -> dict[str, int]:
        return {"top": self.top, "left": self.left, "height": self.height, "width": self.width}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PatchRegion:
        return cls(
            top=int(data["top"]),
            left=int(data["left"]),
            height=int(data["height"]),
            width=int(data["width"]),
        )


@dataclass(frozen=True)
class PatchSpec:
    """
    One augmentation: where the patch goes, how strongly, and between which images.

    Attributes:
        region: The patch h
        alpha: Interpolation factor in [0, 1]
        dest_index: Dataset index of the destination image (None until paired)
        source_index: Dataset index of the source image (None until paired)
    """
    region: PatchRegion
    alpha: float
    dest_index: int | None = None
    source_index: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if (
            self.dest_index is not None
            and self.source_index is not None
            and self.dest_index == self.source_index
        ):
            raise ValueError(f"source and destination must differ, both are {self.dest_index}")

    def with_indices(self, dest_index: int, source_index: int) -> PatchSpec:
        """Return a copy paired with dataset indices (immutable update)."""
        return replace(self, dest_index=dest_index, source_index=source_index)

    def transpose(self) -> PatchSpec:
        return replace(self, region=self.region.transpose())

    def to_dict(self) -> dict[str, Any]:
        return {
            "region": self.region.to_dict(),
            "alpha": self.alpha,
            "dest_index": self.dest_index,
            "source_index": self.source_index,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PatchSpec:
        return cls(
            region=PatchRegion.from_dict(data["region"]),
            alpha=float(data["alpha"]),
            dest_index=data.get("dest_index"),
            source_index=data.get("source_index"),
        )


@dataclass(frozen=True)
class SolverStats:
    """Outcome of a Poisson solve: worst relative residual and iteration count."""
    residual_norm: float
    iterations: int

    def to_dict(self) -> dict[str, Any]:
        return {"residual_norm": self.residual_norm, "iterations": self.iterations}


@dataclass(frozen=True, eq=False)
class AugmentedSample:
    """
    A synthesized training sample with its label map and provenance.

    Attributes:
        image: The blended image
        label: Per-pixel interpolation factor (alpha inside the patch, 0 elsewhere)
        spec: Patch, alpha and the dataset indices it was built from
        rng_stream_id: 64-bit id of the random stream that drew spec
        index: Position of the sample in its corpus
        solver_stats: Residual and iterations when blended with PII, else None
    """
    image: ImageGrid
    label: LabelMap
    spec: PatchSpec
    rng_stream_id: int
    index: int = 0
    solver_stats: SolverStats | None = None


def content_digest(payload: bytes) -> str:
    """
    Deterministic SHA-256 digest (16 hex chars) of a file payload.

    Recorded per output file so a regenerated corpus can be compared
    byte-for-byte from the manifest alone.
    """
    return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True)
class SampleRecord:
    """
    Manifest entry for one generated sample.

    Attributes:
        index: Sample index in the corpus
        status: "ok" or "failed"
        dest_file: Destination image file name
        source_file: Source image file name
        spec: The PatchSpec used
        rng_stream_id: Random stream id for this sample
        image_file: Output image file name (None if failed)
        label_file: Output label file name (None if failed)
        image_digest: content_digest of the image file
        label_digest: content_digest of the label file
        solver_stats: Solver outcome for PII samples
        output_min: Minimum intensity of the output image
        output_max: Maximum intensity of the output image
        overshoot: True if the patch leaves the destination's intensity range
        error: Failure message for failed samples
    """
    index: int
    status: str
    dest_file: str
    source_file: str
    spec: PatchSpec
    rng_stream_id: int
    image_file: str | None = None
    label_file: str | None = None
    image_digest: str | None = None
    label_digest: str | None = None
    solver_stats: SolverStats | None = None
    output_min: float | None = None
    output_max: float | None = None
    overshoot: bool = False
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "status": self.status,
            "dest_file": self.dest_file,
            "source_file": self.source_file,
            "spec": self.spec.to_dict(),
            "rng_stream_id": self.rng_stream_id,
            "image_file": self.image_file,
            "label_file": self.label_file,
            "image_digest": self.image_digest,
            "label_digest": self.label_digest,
            "solver_stats": self.solver_stats.to_dict() if self.solver_stats else None,
            "output_min": self.output_min,
            "output_max": self.output_max,
            "overshoot": self.overshoot,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SampleRecord:
        stats = data.get("solver_stats")
        return cls(
            index=int(data["index"]),
            status=str(data["status"]),
            dest_file=str(data["dest_file"]),
            source_file=str(data["source_file"]),
            spec=PatchSpec.from_dict(data["spec"]),
            rng_stream_id=int(data["rng_stream_id"]),
            image_file=data.get("image_file"),
            label_file=data.get("label_file"),
            image_digest=data.get("image_digest"),
            label_digest=data.get("label_digest"),
            solver_stats=SolverStats(**stats) if stats else None,
            output_min=data.get("output_min"),
            output_max=data.get("output_max"),
            overshoot=bool(data.get("overshoot", False)),
            error=data.get("error"),
        )


@dataclass(frozen=True)
class CorpusManifest:
    """
    Reproducibility record of a generated corpus.

    Regenerating with the same seed, configs and inputs reproduces every
    raw_f32 output bit-exactly; the manifest is written with sorted keys
    so two runs can be diffed byte-for-byte.

    Attributes:
        tool_version: patchy version that wrote the corpus
        rng: Name of the random generator algorithm
        master_seed: Seed every per-sample stream derives from
        mode: "fpi" or "pii"
        normalize: Whether inputs were normalized before blending
        image_shape: (height, width, channels) shared by all inputs
        sampler_config: SamplerConfig.to_dict()
        solver_config: SolverConfig.to_dict()
        inputs: Input file names in dataset-index order
        records: One SampleRecord per requested sample
    """
    tool_version: str
    rng: str
    master_seed: int
    mode: str
    normalize: bool
    image_shape: tuple[int, int, int]
    sampler_config: dict[str, Any]
    solver_config: dict[str, Any]
    inputs: tuple[str, ...] = ()
    records: tuple[SampleRecord, ...] = field(default_factory=tuple)

    @property
    def failed(self) -> list[SampleRecord]:
        return [r for r in self.records if not r.ok]

    def output_files(self) -> set[str]:
        """Every output file name the manifest claims."""
        names: set[str] = set()
        for r in self.records:
            names.update(n for n in (r.image_file, r.label_file) if n)
        return names

    def overshoot_stats(self) -> dict[str, Any]:
        """Global intensity range of the outputs and the number of overshooting samples."""
        ok = [r for r in self.records if r.ok and r.output_min is not None]
        return {
            "output_min": min((r.output_min for r in ok), default=None),  # type: ignore[type-var]
            "output_max": max((r.output_max for r in ok), default=None),  # type: ignore[type-var]
            "overshoot_samples": sum(1 for r in ok if r.overshoot),
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool_version": self.tool_version,
            "rng": self.rng,
            "master_seed": self.master_seed,
            "mode": self.mode,
            "normalize": self.normalize,
            "image_shape": list(self.image_shape),
            "sampler_config": self.sampler_config,
            "solver_config": self.solver_config,
            "inputs": list(self.inputs),
            "records": [r.to_dict() for r in self.records],
            "statistics": {
                "requested": len(self.records),
                "failed": len(self.failed),
                **self.overshoot_stats(),
            },
        }

    def to_json(self, indent: int | None = 2) -> str:
        """Serialize to JSON with stable key order."""
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CorpusManifest:
        return cls(
            tool_version=str(data["tool_version"]),
            rng=str(data["rng"]),
            master_seed=int(data["master_seed"]),
            mode=str(data["mode"]),
            normalize=bool(data["normalize"]),
            image_shape=tuple(data["image_shape"]),  # type: ignore[arg-type]
            sampler_config=dict(data["sampler_config"]),
            solver_config=dict(data["solver_config"]),
            inputs=tuple(data.get("inputs", ())),
            records=tuple(SampleRecord.from_dict(r) for r in data.get("records", ())),
        )

    @classmethod
    def from_json(cls, text: str) -> CorpusManifest:
        return cls.from_dict(json.loads(text))

    def to_pydantic(self) -> Any:
        """
        Convert to a Pydantic model (requires pydantic extra).

        Returns:
            PydanticCorpusManifest model instance

        Raises:
            ImportError: If pydantic is not installed
        """
        try:
            from pydantic import BaseModel, ConfigDict
        except ImportError:
            raise ImportError(
                "Pydantic is required for to_pydantic(). "
                "Install with: pip install patchy-poisson[pydantic]"
            )

        class PydanticSampleRecord(BaseModel):
            model_config = ConfigDict(frozen=True)

            index: int
            status: str
            dest_file: str
            source_file: str
            spec: dict[str, Any]
            rng_stream_id: int
            image_file: str | None = None
            label_file: str | None = None
            image_digest: str | None = None
            label_digest: str | None = None
            solver_stats: dict[str, Any] | None = None
            output_min: float | None = None
            output_max: float | None = None
            overshoot: bool = False
            error: str | None = None

        class PydanticCorpusManifest(BaseModel):
            model_config = ConfigDict(frozen=True)

            tool_version: str
            rng: str
            master_seed: int
            mode: str
            normalize: bool
            image_shape: tuple[int, int, int]
            sampler_config: dict[str, Any]
            solver_config: dict[str, Any]
            inputs: list[str] = []
            records: list[PydanticSampleRecord] = []
            statistics: dict[str, Any] = {}

        return PydanticCorpusManifest(**self.to_dict())
