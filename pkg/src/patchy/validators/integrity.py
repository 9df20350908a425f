"""
Sample and corpus validation.

Provides checks to run after generation:
- Poisson residual re-evaluated stencil-wise on the output patch
- Seam statistics across the patch boundary
- Label support and outside-patch exactness
- Manifest completeness against the files on disk
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from patchy.blending.poisson import NEIGHBOURS
from patchy.errors import ShapeMismatchError

if TYPE_CHECKING:
    from patchy.blending.poisson import GuidanceField
    from patchy.core.schema import (
        AugmentedSample,
        CorpusManifest,
        ImageGrid,
        PatchRegion,
        PatchSpec,
    )


@dataclass
class ValidationError:
    """
    Represents a validation error.

    Attributes:
        sample_id: Sample index or file the error refers to
        message: Description of the error
        severity: "error" or "warning"
        details: Additional error details
    """
    sample_id: str
    message: str
    severity: str = "error"
    details: dict[str, Any] | None = None

    def __str__(self) -> str:
        return f"[{self.severity.upper()}] Sample {self.sample_id}: {self.message}"


@dataclass
class ValidationWarning(ValidationError):
    """A non-fatal validation issue."""
    severity: str = "warning"


# Output files written by the corpus generator
OUTPUT_FILE_PATTERN = re.compile(r"^\d+_(img|lbl)\.raw$")


def system_residual(
    dest: ImageGrid, guidance: GuidanceField, spec: PatchSpec, output: ImageGrid
) -> float:
    """
    Relative residual of the patch equations, evaluated directly on pixels.

    For each patch pixel p, sum_q (out_p - out_q) must equal sum_q v_pq, with
    ring neighbours taken from dest. The norm is relative to the right-hand
    side (ring values plus divergence), absolute when that is zero; the worst
    channel is returned.
    """
    region = spec.region
    if guidance.region != region:
        raise ShapeMismatchError(f"Guidance covers {guidance.region}, patch is {region}")
    dest.check_same_shape(output)
    rows, cols = region.slices
    centre = output.data[rows, cols]
    inside = np.zeros((dest.height, dest.width), dtype=bool)
    inside[rows, cols] = True

    lhs = np.zeros_like(centre)
    ring_sum = np.zeros_like(centre)
    for dr, dc in NEIGHBOURS:
        q_rows = slice(region.top + dr, region.bottom + dr)
        q_cols = slice(region.left + dc, region.right + dc)
        neighbour = output.data[q_rows, q_cols]
        on_ring = ~inside[q_rows, q_cols]
        lhs += centre - neighbour
        ring_sum += np.where(on_ring[:, :, None], dest.data[q_rows, q_cols], 0.0)

    divergence = guidance.divergence()
    residual = lhs - divergence
    rhs = ring_sum + divergence

    worst = 0.0
    for c in range(output.channels):
        r = float(np.linalg.norm(residual[:, :, c]))
        b = float(np.linalg.norm(rhs[:, :, c]))
        worst = max(worst, r / b if b > 0 else r)
    return worst


def boundary_jump(image: ImageGrid, region: PatchRegion) -> float:
    """Largest |difference| between a patch pixel and its neighbour on the ring."""
    data = image.data
    r0, r1, c0, c1 = region.top, region.bottom, region.left, region.right
    jumps = [
        np.abs(data[r0, c0:c1] - data[r0 - 1, c0:c1]),
        np.abs(data[r1 - 1, c0:c1] - data[r1, c0:c1]),
        np.abs(data[r0:r1, c0] - data[r0:r1, c0 - 1]),
        np.abs(data[r0:r1, c1 - 1] - data[r0:r1, c1]),
    ]
    return float(max(j.max() for j in jumps))


def interior_jump(image: ImageGrid, region: PatchRegion) -> float:
    """Largest |difference| between two adjacent pixels both inside the patch."""
    patch = image.data[region.slices]
    jumps = [0.0]
    if patch.shape[0] > 1:
        jumps.append(float(np.abs(np.diff(patch, axis=0)).max()))
    if patch.shape[1] > 1:
        jumps.append(float(np.abs(np.diff(patch, axis=1)).max()))
    return max(jumps)


def validate_label(sample: AugmentedSample) -> list[ValidationError]:
    """
    Check that the label is alpha exactly on the patch and 0 elsewhere.

    Returns:
        List of ValidationError (empty when the label is consistent)
    """
    errors: list[ValidationError] = []
    sid = str(sample.index)
    region = sample.spec.region
    mask = region.mask(*sample.label.shape)
    label = sample.label.data
    alpha = sample.spec.alpha

    if np.any(label[~mask] != 0.0):
        errors.append(ValidationError(
            sample_id=sid,
            message="Label is nonzero outside the patch",
            details={"pixels": int(np.count_nonzero(label[~mask]))},
        ))
    if np.any(label[mask] != alpha):
        errors.append(ValidationError(
            sample_id=sid,
            message=f"Label inside the patch differs from alpha {alpha}",
            details={"alpha": alpha, "values": sorted(set(np.unique(label[mask]).tolist()))},
        ))
    return errors


def validate_outside_patch(sample: AugmentedSample, dest: ImageGrid) -> list[ValidationError]:
    """Check that the image equals dest bit-for-bit outside the patch."""
    mask = sample.spec.region.mask(dest.height, dest.width)
    changed = sample.image.data[~mask] != dest.data[~mask]
    if np.any(changed):
        return [ValidationError(
            sample_id=str(sample.index),
            message="Image differs from the destination outside the patch",
            details={"values": int(np.count_nonzero(changed))},
        )]
    return []


def flag_overshoot(sample: AugmentedSample, dest: ImageGrid) -> list[ValidationWarning]:
    """
    Flag patches whose values leave the destination's intensity range.

    Not an error: solved values are never clipped, so overshoot is expected
    now and then. It is reported so corpus statistics can track it.
    """
    patch = sample.image.data[sample.spec.region.slices]
    lo, hi = float(dest.data.min()), float(dest.data.max())
    p_lo, p_hi = float(patch.min()), float(patch.max())
    if p_lo < lo or p_hi > hi:
        return [ValidationWarning(
            sample_id=str(sample.index),
            message=f"Patch range [{p_lo:.4g}, {p_hi:.4g}] leaves destination range "
                    f"[{lo:.4g}, {hi:.4g}]",
            details={"patch_min": p_lo, "patch_max": p_hi, "dest_min": lo, "dest_max": hi},
        )]
    return []


def validate_sample(
    sample: AugmentedSample,
    dest: ImageGrid,
    check_overshoot: bool = True,
) -> tuple[list[ValidationError], list[ValidationWarning]]:
    """
    Run all per-sample validations.

    Args:
        sample: Generated sample
        dest: The destination image it was built from
        check_overshoot: Whether to flag patch values outside the destination range

    Returns:
        Tuple of (errors, warnings)
    """
    errors: list[ValidationError] = []
    warnings: list[ValidationWarning] = []

    errors.extend(validate_label(sample))
    errors.extend(validate_outside_patch(sample, dest))

    if check_overshoot:
        warnings.extend(flag_overshoot(sample, dest))

    return errors, warnings


def validate_manifest(
    manifest: CorpusManifest,
    output_dir: str | Path,
) -> list[ValidationError]:
    """
    Check that the manifest and the output directory list the same files.

    Every output file on disk must be claimed by a record, and every file a
    record claims must exist.
    """
    output_dir = Path(output_dir)
    errors: list[ValidationError] = []
    claimed = manifest.output_files()
    on_disk = {
        p.name for p in output_dir.iterdir() if p.is_file() and OUTPUT_FILE_PATTERN.match(p.name)
    }

    for name in sorted(on_disk - claimed):
        errors.append(ValidationError(
            sample_id=name,
            message="Output file is not listed in the manifest",
        ))
    for name in sorted(claimed - on_disk):
        errors.append(ValidationError(
            sample_id=name,
            message="Manifest lists a file that does not exist",
        ))
    return errors
