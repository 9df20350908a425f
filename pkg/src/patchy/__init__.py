"""
patchy - Poisson image interpolation for self-supervised anomaly detection.

Synthesizes training anomalies by blending a patch of one normal image into
another, either as a convex combination (FPI) or by solving a Poisson equation
over the patch (PII), and scores detectors by average precision.

Image formats:
- 8-bit and 16-bit single-channel PNG (.png)
- raw_f32 float32 container (.raw, .piig, .f32)
"""

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # Core types
    "ImageGrid",
    "PatchRegion",
    "PatchSpec",
    "AugmentedSample",
    "CorpusManifest",
    # Image preparation and sampling
    "normalize",
    "denormalize",
    "SamplerConfig",
    "PatchSampler",
    # Blending
    "fpi_blend",
    "pii_blend",
    "SolverConfig",
    "get_blender",
    # Supervision
    "make_label",
    "ScoreMap",
    "bce_loss",
    # Evaluation
    "aggregate_score",
    "average_precision",
    # Files and corpora
    "load_image",
    "save_image",
    "generate_corpus",
    "iter_samples",
    "CorpusGenerator",
    "GeneratorConfig",
]


def __getattr__(name: str):  # type: ignore[no-untyped-def]
    """Lazy imports to avoid loading scipy and Pillow on import."""
    # Core types
    if name in ("ImageGrid", "PatchRegion", "PatchSpec", "AugmentedSample", "CorpusManifest"):
        from patchy.core import schema
        return getattr(schema, name)
    if name == "normalize":
        from patchy.core.normalize import normalize
        return normalize
    if name == "denormalize":
        from patchy.core.normalize import denormalize
        return denormalize
    if name in ("SamplerConfig", "PatchSampler"):
        from patchy.core import sampler
        return getattr(sampler, name)

    # Blending
    if name == "fpi_blend":
        from patchy.blending.fpi import fpi_blend
        return fpi_blend
    if name == "pii_blend":
        from patchy.blending.poisson import pii_blend
        return pii_blend
    if name == "SolverConfig":
        from patchy.blending.poisson import SolverConfig
        return SolverConfig
    if name == "get_blender":
        from patchy.blending import get_blender
        return get_blender

    # Supervision
    if name in ("make_label", "ScoreMap", "bce_loss"):
        from patchy import supervision
        return getattr(supervision, name)

    # Evaluation
    if name in ("aggregate_score", "average_precision"):
        from patchy.evaluation import metrics
        return getattr(metrics, name)

    # Files and corpora
    if name in ("load_image", "save_image"):
        from patchy import files
        return getattr(files, name)
    if name in ("generate_corpus", "iter_samples", "CorpusGenerator", "GeneratorConfig"):
        from patchy.core import generator
        return getattr(generator, name)

    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
