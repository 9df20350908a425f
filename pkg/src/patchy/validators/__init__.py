"""Sample and corpus validation."""

from patchy.validators.integrity import (
    ValidationError,
    ValidationWarning,
    boundary_jump,
    flag_overshoot,
    interior_jump,
    system_residual,
    validate_label,
    validate_manifest,
    validate_outside_patch,
    validate_sample,
)

__all__ = [
    "system_residual",
    "boundary_jump",
    "interior_jump",
    "validate_label",
    "validate_outside_patch",
    "flag_overshoot",
    "validate_sample",
    "validate_manifest",
    "ValidationError",
    "ValidationWarning",
]
