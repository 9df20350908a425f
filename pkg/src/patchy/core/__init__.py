"""Core data structures, normalization and sampling.

The corpus generator lives in patchy.core.generator; it is not imported
here because it depends on patchy.blending, which depends on this package.
"""

from patchy.core.normalize import denormalize, normalize
from patchy.core.sampler import (
    RNG_NAME,
    PatchSampler,
    SamplerConfig,
    sample_augmentation,
    sample_pair,
    sample_patch,
    sample_stream,
    stream_id,
)
from patchy.core.schema import (
    AugmentedSample,
    CorpusManifest,
    ImageGrid,
    NormalizationStats,
    PatchRegion,
    PatchSpec,
    SampleRecord,
    SolverStats,
    content_digest,
)

__all__ = [
    "ImageGrid",
    "NormalizationStats",
    "PatchRegion",
    "PatchSpec",
    "SolverStats",
    "AugmentedSample",
    "SampleRecord",
    "CorpusManifest",
    "content_digest",
    "normalize",
    "denormalize",
    "SamplerConfig",
    "PatchSampler",
    "RNG_NAME",
    "sample_patch",
    "sample_pair",
    "sample_augmentation",
    "sample_stream",
    "stream_id",
]
