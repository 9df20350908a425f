"""
Exception hierarchy for patchy.

Every error raised on purpose by the library derives from PatchyError,
so callers (and the CLI) can catch one type. Argument problems also
derive from ValueError and file problems from OSError.
"""

from __future__ import annotations


class PatchyError(Exception):
    """Base class for all patchy errors."""


# Image core

class ImageIOError(PatchyError, OSError):
    """A file could not be read or written."""


class FormatError(PatchyError, ValueError):
    """A file does not parse under its declared format."""


class RangeError(PatchyError, ValueError):
    """Values cannot be represented in the requested file format."""


class ConstantChannelError(PatchyError, ValueError):
    """A channel has zero standard deviation and cannot be normalized."""


class RegionOutOfBoundsError(PatchyError, ValueError):
    """A patch region (or its boundary ring) leaves the image."""


class ShapeMismatchError(PatchyError, ValueError):
    """Two grids that must share a shape do not."""


# Sampling

class ImageTooSmallError(PatchyError, ValueError):
    """The image is too small to hold a valid patch."""


class DatasetTooSmallError(PatchyError, ValueError):
    """Fewer than two images to pair."""


# Solver

class NonConvergenceError(PatchyError):
    """The Poisson solve did not reach the requested tolerance."""

    def __init__(self, message: str, residual_norm: float, iterations: int) -> None:
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


# Supervision and evaluation

class DomainError(PatchyError, ValueError):
    """A score lies outside the open interval (0, 1) or is not finite."""


class EmptyMapError(PatchyError, ValueError):
    """A score map has no pixels."""


class BadKError(PatchyError, ValueError):
    """top_k_mean was asked for k outside 1..pixel count."""


class EmptyInputError(PatchyError, ValueError):
    """An evaluation input list is empty."""


class NoPositivesError(PatchyError, ValueError):
    """Average precision needs at least one anomalous sample."""


# Corpus and CLI

class InsufficientInputsError(PatchyError, ValueError):
    """The input directory holds fewer than two loadable images."""


class ShapeHeterogeneityError(PatchyError, ValueError):
    """Input images do not all share one shape."""


class MissingLabelError(PatchyError, KeyError):
    """A score map has no ground-truth entry."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class MalformedScoreMapError(PatchyError, ValueError):
    """A score map file is not a single-channel map of values in [0, 1]."""


__all__ = [
    "PatchyError",
    "ImageIOError",
    "FormatError",
    "RangeError",
    "ConstantChannelError",
    "RegionOutOfBoundsError",
    "ShapeMismatchError",
    "ImageTooSmallError",
    "DatasetTooSmallError",
    "NonConvergenceError",
    "DomainError",
    "EmptyMapError",
    "BadKError",
    "EmptyInputError",
    "NoPositivesError",
    "InsufficientInputsError",
    "ShapeHeterogeneityError",
    "MissingLabelError",
    "MalformedScoreMapError",
]
