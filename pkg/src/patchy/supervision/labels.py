"""
Pixel-wise label and score maps.

A label map holds the interpolation factor alpha inside the patch and 0
everywhere else. A score map holds a model's per-pixel anomaly score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from patchy.core.schema import ImageGrid, PatchSpec
from patchy.errors import DomainError

# Scores are clamped to [SCORE_EPS, 1 - SCORE_EPS] before any log
SCORE_EPS = 1e-7


@dataclass(frozen=True, eq=False)
class LabelMap:
    """
    Single-channel map of per-pixel interpolation factors in [0, 1].

    Attributes:
        data: Read-only float64 array of shape (height, width)
    """
    data: NDArray[np.float64]

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"LabelMap needs a 2-D array, got {arr.ndim}-D")
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            raise ValueError("LabelMap values must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.data.shape[0]), int(self.data.shape[1]))

    def to_image(self) -> ImageGrid:
        """The map as a one-channel ImageGrid, for saving."""
        return ImageGrid(self.data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelMap):
            return NotImplemented
        return bool(np.array_equal(self.data, other.data))

    def __hash__(self) -> int:
        return hash(self.data.tobytes())


@dataclass(frozen=True, eq=False)
class ScoreMap:
    """
    Per-pixel anomaly scores, held strictly inside (0, 1).

    Values within [0, 1] are clamped to [SCORE_EPS, 1 - SCORE_EPS]; anything
    outside [0, 1] or not finite is rejected.

    Attributes:
        data: Read-only float64 array of shape (height, width)
    """
    data: NDArray[np.float64]

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        if arr.ndim != 2:
            raise DomainError(f"ScoreMap needs a single-channel 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError("Scores must be finite and lie in [0, 1]")
        arr = np.clip(arr, SCORE_EPS, 1.0 - SCORE_EPS)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, array: ArrayLike) -> ScoreMap:
        return cls(np.asarray(array))

    @classmethod
    def from_image(cls, image: ImageGrid) -> ScoreMap:
        if image.channels != 1:
            raise DomainError(f"Score maps have one channel, image has {image.channels}")
        return cls(image.channel(0))

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.data.shape[0]), int(self.data.shape[1]))

    @property
    def size(self) -> int:
        return int(self.data.size)


def make_label(spec: PatchSpec, height: int, width: int) -> LabelMap:
    """
    Label map for one augmentation: alpha on the patch, 0 elsewhere.

    Edges are hard; no smoothing at the patch border.

    Raises:
        RegionOutOfBoundsError: If the patch does not fit a height x width image

    Example:
        >>> spec = PatchSpec(PatchRegion(2, 2, 4, 4), alpha=0.3)
        >>> int((make_label(spec, 8, 8).data == 0.3).sum())
        16
    """
    spec.region.check_fits(height, width)
    data = np.zeros((height, width), dtype=np.float64)
    data[spec.region.slices] = spec.alpha
    return LabelMap(data)
