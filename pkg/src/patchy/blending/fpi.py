"""
Foreign patch interpolation: a convex combination of two images inside a patch.

Kept as the baseline PII is compared against.
"""

from __future__ import annotations

import numpy as np

from patchy.blending.base import BaseBlender, BlendResult
from patchy.core.schema import ImageGrid, PatchSpec


def fpi_blend(dest: ImageGrid, source: ImageGrid, spec: PatchSpec) -> ImageGrid:
    """
    Replace the patch with (1 - alpha) * dest + alpha * source.

    Pixels outside the patch are copied from dest unchanged; blended values are not clipped.

    Raises:
        ShapeMismatchError: If dest and source differ in shape
        RegionOutOfBoundsError: If the patch does not fit the images
    """
    dest.check_same_shape(source)
    spec.region.check_fits(dest.height, dest.width)

    rows, cols = spec.region.slices
    alpha = spec.alpha
    out = dest.to_array()
    if alpha == 0.0:
        return ImageGrid(out)

    d = dest.data[rows, cols]
    s = source.data[rows, cols]
    if alpha == 1.0:
        out[rows, cols] = s
    else:
        # clip only absorbs rounding; the exact convex combination lies in [min, max]
        mixed = (1.0 - alpha) * d + alpha * s
        out[rows, cols] = np.clip(mixed, np.minimum(d, s), np.maximum(d, s))
    return ImageGrid(out)


class FPIBlender(BaseBlender):
    """
    Blender wrapper for fpi_blend.

    Example:
        sample = FPIBlender().augment(dest, source, spec)
    """

    _name: str = "fpi"

    def blend(self, dest: ImageGrid, source: ImageGrid, spec: PatchSpec) -> BlendResult:
        return BlendResult(image=fpi_blend(dest, source, spec))
