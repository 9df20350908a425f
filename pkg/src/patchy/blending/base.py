"""
Blender protocol and base classes.

Defines the interface every patch blending method implements, so the
corpus generator and CLI can switch between FPI and PII by name.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from patchy.core.schema import AugmentedSample, ImageGrid, PatchSpec, SolverStats


@dataclass(frozen=True, eq=False)
class BlendResult:
    """
    Output of one blend.

    Attributes:
        image: The blended image
        solver_stats: Solver outcome, for methods that solve a system
    """
    image: ImageGrid
    solver_stats: SolverStats | None = None


@runtime_checkable
class Blender(Protocol):
    """
    Protocol for patch blenders - any class with these members works.

    Example:
        class CopyBlender:
            name = "copy"

            def blend(self, dest, source, spec):
                out = dest.to_array()
                out[spec.region.slices] = source.data[spec.region.slices]
                return BlendResult(ImageGrid(out))
    """

    @property
    def name(self) -> str:
        """Mode identifier recorded in manifests ('fpi', 'pii')."""
        ...

    def blend(self, dest: ImageGrid, source: ImageGrid, spec: PatchSpec) -> BlendResult:
        """
        Blend source into dest inside spec.region.

        Args:
            dest: Destination image
            source: Source image
            spec: Patch and interpolation factor

        Returns:
            BlendResult with the image equal to dest outside the patch
        """
        ...


class BaseBlender:
    """
    Base class for blenders.

    Subclasses override blend(); augment() then pairs the result with its label map.
    """

    _name: str = "base"

    @property
    def name(self) -> str:
        return self._name

    def blend(self, dest: ImageGrid, source: ImageGrid, spec: PatchSpec) -> BlendResult:
        raise NotImplementedError("Subclass must implement blend()")

    def augment(
        self,
        dest: ImageGrid,
        source: ImageGrid,
        spec: PatchSpec,
        rng_stream_id: int = 0,
        index: int = 0,
    ) -> AugmentedSample:
        """
        Blend and build the matching label map in one call.

        Returns:
            AugmentedSample with image, label and provenance
        """
        from patchy.supervision.labels import make_label

        result = self.blend(dest, source, spec)
        return AugmentedSample(
            image=result.image,
            label=make_label(spec, dest.height, dest.width),
            spec=spec,
            rng_stream_id=rng_stream_id,
            index=index,
            solver_stats=result.solver_stats,
        )
