"""Patch blending methods: foreign patch interpolation and Poisson image interpolation."""

from __future__ import annotations

from patchy.blending.base import BaseBlender, Blender, BlendResult
from patchy.blending.fpi import FPIBlender, fpi_blend
from patchy.blending.poisson import (
    GuidanceField,
    PoissonBlender,
    PoissonSolution,
    SolverConfig,
    assemble_system,
    build_guidance,
    pii_blend,
    solve_patch,
)

BLEND_MODES: tuple[str, ...] = ("fpi", "pii")

__all__ = [
    "Blender",
    "BaseBlender",
    "BlendResult",
    "FPIBlender",
    "PoissonBlender",
    "GuidanceField",
    "PoissonSolution",
    "SolverConfig",
    "fpi_blend",
    "pii_blend",
    "build_guidance",
    "assemble_system",
    "solve_patch",
    "get_blender",
    "BLEND_MODES",
]


def get_blender(mode: str, solver_config: SolverConfig | None = None) -> BaseBlender:
    """
    Create a blender by mode name ("fpi" or "pii").

    Raises:
        ValueError: If the mode is unknown
    """
    if mode == "fpi":
        return FPIBlender()
    elif mode == "pii":
        return PoissonBlender(solver_config)
    else:
        raise ValueError(f"Unknown blend mode: {mode!r} (expected one of {BLEND_MODES})")
