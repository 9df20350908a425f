"""
Seeded sampling of patch geometry, interpolation factors and image pairs.

Patch side lengths are drawn per axis as uniform fractions of that axis,
centers likewise, and alpha uniformly from its range. Each corpus sample
gets its own PCG64 stream seeded by (master_seed, sample_index), so the
samples do not depend on generation order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from patchy.core.schema import PatchRegion, PatchSpec
from patchy.errors import DatasetTooSmallError, ImageTooSmallError

# Recorded in corpus manifests
RNG_NAME = "PCG64"

MIN_IMAGE_SIDE = 16
MIN_PATCH_SIDE = 3


def _check_range(name: str, value: tuple[float, float]) -> tuple[float, float]:
    lo, hi = (float(v) for v in value)
    if not (0.0 <= lo <= hi <= 1.0):
        raise ValueError(f"{name} must satisfy 0 <= lo <= hi <= 1, got ({lo}, {hi})")
    return lo, hi


@dataclass(frozen=True)
class SamplerConfig:
    """
    Configuration for patch sampling.

    Ranges are fractions of the axis length (size, center) or the alpha value itself.

    Attributes:
        size_fraction_range: Patch side length as a fraction of the axis
        center_fraction_range: Patch center as a fraction of the axis
        alpha_range: Interpolation factor range
        seed: Master seed (unsigned 64-bit)
    """
    size_fraction_range: tuple[float, float] = (0.1, 0.4)
    center_fraction_range: tuple[float, float] = (0.1, 0.9)
    alpha_range: tuple[float, float] = (0.05, 0.95)
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("size_fraction_range", "center_fraction_range", "alpha_range"):
            object.__setattr__(self, name, _check_range(name, getattr(self, name)))
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "size_fraction_range": list(self.size_fraction_range),
            "center_fraction_range": list(self.center_fraction_range),
            "alpha_range": list(self.alpha_range),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SamplerConfig:
        return cls(
            size_fraction_range=tuple(data["size_fraction_range"]),  # type: ignore[arg-type]
            center_fraction_range=tuple(data["center_fraction_range"]),  # type: ignore[arg-type]
            alpha_range=tuple(data["alpha_range"]),  # type: ignore[arg-type]
            seed=int(data["seed"]),
        )


def _uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    # One 53-bit draw per call keeps the stream layout fixed across numpy versions
    return lo + (hi - lo) * float(rng.random())


def _place(size_draw: float, center_draw: float, length: int, axis: str) -> tuple[int, int]:
    """Round a continuous draw to (start, size), clamped so the boundary ring stays in-image."""
    size = max(MIN_PATCH_SIDE, math.floor(size_draw + 0.5))
    start = math.floor(center_draw - size / 2.0)
    hi = length - 1 - size
    if hi < 1:
        raise ImageTooSmallError(
            f"A {size}-pixel patch with a 1-pixel ring does not fit a {length}-pixel {axis}"
        )
    return min(max(start, 1), hi), size


def sample_patch(
    config: SamplerConfig,
    image_height: int,
    image_width: int,
    rng: np.random.Generator,
) -> PatchSpec:
    """
    Draw a patch region and alpha.

    Draw order is fixed: height size, width size, row center, column center, alpha.
    Sizes are rounded to the nearest integer (minimum 3 pixels); a patch that would
    overlap the border is translated inward rather than redrawn.

    Args:
        config: Sampling ranges
        image_height: Rows in the image (>= 16)
        image_width: Columns in the image (>= 16)
        rng: Generator to draw from (advanced in place)

    Returns:
        PatchSpec without dataset indices

    Raises:
        ImageTooSmallError: If the image is smaller than 16 pixels on an axis
            or the patch cannot be placed with its boundary ring
    """
    if image_height < MIN_IMAGE_SIDE or image_width < MIN_IMAGE_SIDE:
        raise ImageTooSmallError(
            f"Images must be at least {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE}, "
            f"got {image_height}x{image_width}"
        )

    size_lo, size_hi = config.size_fraction_range
    center_lo, center_hi = config.center_fraction_range

    size_h = _uniform(rng, size_lo * image_height, size_hi * image_height)
    size_w = _uniform(rng, size_lo * image_width, size_hi * image_width)
    center_h = _uniform(rng, center_lo * image_height, center_hi * image_height)
    center_w = _uniform(rng, center_lo * image_width, center_hi * image_width)
    alpha = _uniform(rng, *config.alpha_range)

    top, height = _place(size_h, center_h, image_height, "height")
    left, width = _place(size_w, center_w, image_width, "width")

    region = PatchRegion.inside(top, left, height, width, image_height, image_width)
    return PatchSpec(region=region, alpha=alpha)


def sample_pair(dataset_size: int, rng: np.random.Generator) -> tuple[int, int]:
    """
    Draw an ordered pair (dest_index, source_index) of distinct dataset indices.

    Every ordered pair is equally likely.

    Raises:
        DatasetTooSmallError: If dataset_size < 2
    """
    if dataset_size < 2:
        raise DatasetTooSmallError(f"Need at least 2 images to pair, got {dataset_size}")
    dest = int(rng.integers(dataset_size))
    source = int(rng.integers(dataset_size - 1))
    if source >= dest:
        source += 1
    return dest, source


def sample_augmentation(
    config: SamplerConfig,
    image_height: int,
    image_width: int,
    dataset_size: int,
    rng: np.random.Generator,
) -> PatchSpec:
    """Draw a pair and then a patch from one stream."""
    dest, source = sample_pair(dataset_size, rng)
    spec = sample_patch(config, image_height, image_width, rng)
    return spec.with_indices(dest, source)


def _seed_sequence(master_seed: int, sample_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), int(sample_index)])


def sample_stream(master_seed: int, sample_index: int) -> np.random.Generator:
    """Independent PCG64 generator for one corpus sample."""
    return np.random.Generator(np.random.PCG64(_seed_sequence(master_seed, sample_index)))


def stream_id(master_seed: int, sample_index: int) -> int:
    """64-bit identifier of the stream returned by sample_stream()."""
    state = _seed_sequence(master_seed, sample_index).generate_state(1, dtype=np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class PatchSampler:
    """
    Binds a SamplerConfig to one image shape and dataset size.

    Example:
        sampler = PatchSampler(SamplerConfig(seed=42), 256, 256, dataset_size=100)
        spec = sampler.draw(0)
        assert sampler.draw(0) == spec
    """
    config: SamplerConfig
    image_height: int
    image_width: int
    dataset_size: int

    def draw(self, sample_index: int) -> PatchSpec:
        """The PatchSpec for sample_index, drawn from that sample's own stream."""
        rng = sample_stream(self.config.seed, sample_index)
        return sample_augmentation(
            self.config, self.image_height, self.image_width, self.dataset_size, rng
        )

    def stream_id(self, sample_index: int) -> int:
        return stream_id(self.config.seed, sample_index)
