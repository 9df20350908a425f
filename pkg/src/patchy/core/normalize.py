"""
Per-image intensity normalization.

Images are normalized individually, channel by channel, to zero mean
and unit (population) standard deviation before blending.
"""

from __future__ import annotations

import numpy as np

from patchy.core.schema import ImageGrid, NormalizationStats
from patchy.errors import ConstantChannelError, ShapeMismatchError


def normalize(image: ImageGrid) -> tuple[ImageGrid, NormalizationStats]:
    """
    Normalize each channel to mean 0 and std 1.

    Args:
        image: Grid to normalize

    Returns:
        (normalized grid, stats needed to invert the transform)

    Raises:
        ConstantChannelError: If any channel is constant

    Example:
        >>> grid, stats = normalize(ImageGrid.from_array([[0.0, 2.0]]))
        >>> grid.data.ravel().tolist(), stats.mean, stats.std
        ([-1.0, 1.0], (1.0, 1.0))
    """
    data = image.data
    mean = data.mean(axis=(0, 1))
    std = data.std(axis=(0, 1))
    for c, s in enumerate(std):
        if not s > 0:
            raise ConstantChannelError(f"Channel {c} is constant ({mean[c]!r}); cannot normalize")

    stats = NormalizationStats(
        mean=tuple(float(m) for m in mean),
        std=tuple(float(s) for s in std),
    )
    return ImageGrid((data - mean) / std), stats


def denormalize(image: ImageGrid, stats: NormalizationStats) -> ImageGrid:
    """Undo normalize(): multiply by std and add the mean back, per channel."""
    if image.channels != stats.channels:
        raise ShapeMismatchError(
            f"Stats cover {stats.channels} channels, image has {image.channels}"
        )
    mean = np.asarray(stats.mean, dtype=np.float64)
    std = np.asarray(stats.std, dtype=np.float64)
    return ImageGrid(image.data * std + mean)
