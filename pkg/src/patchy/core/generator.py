"""
Corpus generation.

Builds seeded (image, label) training samples from a set of normal images,
either streamed to a caller (iter_samples) or written to disk together with
a manifest (CorpusGenerator, generate_corpus).
"""

from __future__ import annotations

import logging
import os
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from patchy.blending import BLEND_MODES, BaseBlender, SolverConfig, get_blender
from patchy.core.normalize import normalize as normalize_image
from patchy.core.sampler import RNG_NAME, PatchSampler, SamplerConfig
from patchy.core.schema import (
    AugmentedSample,
    CorpusManifest,
    ImageGrid,
    SampleRecord,
    SolverStats,
    content_digest,
)
from patchy.errors import (
    InsufficientInputsError,
    NonConvergenceError,
    RangeError,
    ShapeHeterogeneityError,
)
from patchy.files import load_directory, save_image

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
IMAGE_SUFFIX = "_img.raw"
LABEL_SUFFIX = "_lbl.raw"


def output_names(index: int) -> tuple[str, str]:
    """Image and label file names for a sample: zero-padded index plus role suffix."""
    return f"{index:06d}{IMAGE_SUFFIX}", f"{index:06d}{LABEL_SUFFIX}"


@dataclass(frozen=True)
class GeneratorConfig:
    """
    Configuration for corpus generation.

    Attributes:
        mode: Blend mode, "fpi" or "pii"
        count: Number of samples to generate
        seed: Master seed every per-sample random stream derives from
        normalize: Normalize each input to zero mean and unit std before blending
        workers: Number of worker processes (1 = serial)
    """
    mode: str = "pii"
    count: int = 0
    seed: int = 0
    normalize: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.mode not in BLEND_MODES:
            raise ValueError(f"mode must be one of {BLEND_MODES}, got {self.mode!r}")
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "count": self.count,
            "seed": self.seed,
            "normalize": self.normalize,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GeneratorConfig:
        return cls(**data)


def prepare_dataset(images: Sequence[ImageGrid], normalize: bool = True) -> list[ImageGrid]:
    """
    Check a set of input images and optionally normalize each one.

    Raises:
        InsufficientInputsError: If fewer than 2 images are given
        ShapeHeterogeneityError: If the images do not all share one shape
        ConstantChannelError: If normalizing an image with a constant channel
    """
    if len(images) < 2:
        raise InsufficientInputsError(f"Need at least 2 input images, got {len(images)}")
    shapes = sorted({img.shape for img in images})
    if len(shapes) > 1:
        raise ShapeHeterogeneityError(f"Input images differ in shape: {shapes}")
    if not normalize:
        return list(images)
    return [normalize_image(img)[0] for img in images]


def iter_samples(
    images: Sequence[ImageGrid],
    config: GeneratorConfig,
    sampler_config: SamplerConfig | None = None,
    solver_config: SolverConfig | None = None,
) -> Iterator[AugmentedSample]:
    """
    Yield augmented samples on the fly, without touching the disk.

    Sample i is the same sample generate_corpus() writes for index i.
    Samples whose solve does not converge are logged and skipped.

    Example:
        for sample in iter_samples(images, GeneratorConfig(count=1000, seed=7)):
            train_step(sample.image, sample.label)
    """
    dataset = prepare_dataset(images, config.normalize)
    height, width, _ = dataset[0].shape
    sampler = PatchSampler(
        replace(sampler_config or SamplerConfig(), seed=config.seed),
        height,
        width,
        len(dataset),
    )
    blender = get_blender(config.mode, solver_config)

    for index in range(config.count):
        spec = sampler.draw(index)
        try:
            yield blender.augment(
                dataset[spec.dest_index],  # type: ignore[index]
                dataset[spec.source_index],  # type: ignore[index]
                spec,
                rng_stream_id=sampler.stream_id(index),
                index=index,
            )
        except NonConvergenceError as exc:
            logger.warning("Skipping sample %d: %s", index, exc)


@dataclass(frozen=True)
class _SampleJob:
    """Everything one sample needs; pure given the sample index."""
    names: tuple[str, ...]
    dataset: tuple[ImageGrid, ...]
    sampler: PatchSampler
    blender: BaseBlender
    output_dir: Path

    def __call__(self, index: int) -> SampleRecord:
        spec = self.sampler.draw(index)
        dest_index, source_index = spec.dest_index, spec.source_index
        assert dest_index is not None and source_index is not None
        dest = self.dataset[dest_index]
        provenance: dict[str, Any] = {
            "index": index,
            "dest_file": self.names[dest_index],
            "source_file": self.names[source_index],
            "spec": spec,
            "rng_stream_id": self.sampler.stream_id(index),
        }

        image_file, label_file = output_names(index)
        try:
            sample = self.blender.augment(
                dest, self.dataset[source_index], spec, provenance["rng_stream_id"], index
            )
            image_bytes = save_image(sample.image, self.output_dir / image_file, "raw_f32")
            label_bytes = save_image(
                sample.label.to_image(), self.output_dir / label_file, "raw_f32"
            )
        except NonConvergenceError as exc:
            logger.warning("Sample %d failed: %s", index, exc)
            return SampleRecord(
                status="failed",
                solver_stats=SolverStats(exc.residual_norm, exc.iterations),
                error=str(exc),
                **provenance,
            )
        except RangeError as exc:
            logger.warning("Sample %d failed: %s", index, exc)
            # a failed record owns no files
            for name in (image_file, label_file):
                (self.output_dir / name).unlink(missing_ok=True)
            return SampleRecord(status="failed", error=str(exc), **provenance)

        from patchy.validators.integrity import flag_overshoot

        return SampleRecord(
            status="ok",
            image_file=image_file,
            label_file=label_file,
            image_digest=content_digest(image_bytes),
            label_digest=content_digest(label_bytes),
            solver_stats=sample.solver_stats,
            output_min=float(sample.image.data.min()),
            output_max=float(sample.image.data.max()),
            overshoot=bool(flag_overshoot(sample, dest)),
            **provenance,
        )


def _clear_outputs(output_dir: Path) -> None:
    """Remove sample files left by an earlier run so the manifest lists every file."""
    from patchy.validators.integrity import OUTPUT_FILE_PATTERN

    stale = [
        p for p in output_dir.iterdir() if p.is_file() and OUTPUT_FILE_PATTERN.match(p.name)
    ]
    for path in stale:
        path.unlink()
    if stale:
        logger.info("Removed %d sample files from an earlier run in %s", len(stale), output_dir)


# Per-process job installed by the pool initializer
_WORKER_JOB: _SampleJob | None = None


def _init_worker(job: _SampleJob) -> None:
    global _WORKER_JOB
    _WORKER_JOB = job


def _run_worker(index: int) -> SampleRecord:
    assert _WORKER_JOB is not None
    return _WORKER_JOB(index)


class CorpusGenerator:
    """
    Writes a seeded corpus of augmented samples and its manifest.

    Every sample draws from its own random stream, so the output bytes do not
    depend on the worker count or on the order samples finish in.

    Example:
        generator = CorpusGenerator(
            GeneratorConfig(mode="pii", count=500, seed=1234, workers=4),
            sampler_config=SamplerConfig(alpha_range=(0.2, 0.8)),
        )
        manifest = generator.generate("normals/", "corpus/")
        print(len(manifest.failed), "failed")
    """

    def __init__(
        self,
        config: GeneratorConfig,
        sampler_config: SamplerConfig | None = None,
        solver_config: SolverConfig | None = None,
    ) -> None:
        """
        Initialize CorpusGenerator.

        Args:
            config: Mode, count, seed, normalization and worker settings
            sampler_config: Patch and alpha ranges (its seed is replaced by config.seed)
            solver_config: Poisson solver settings, used in pii mode
        """
        self.config = config
        self.sampler_config = replace(sampler_config or SamplerConfig(), seed=config.seed)
        self.solver_config = solver_config or SolverConfig()

    def generate(
        self,
        input_dir: str | Path,
        output_dir: str | Path,
        progress: Callable[[int], None] | None = None,
    ) -> CorpusManifest:
        """
        Generate the corpus from every image in input_dir.

        Args:
            input_dir: Directory of normal images (sorted by name to fix dataset indices)
            output_dir: Directory for the sample files and manifest.json (created if missing;
                sample files from an earlier run are removed)
            progress: Called with 1 after each finished sample

        Returns:
            The CorpusManifest that was written

        Raises:
            InsufficientInputsError: If fewer than 2 images load
            ShapeHeterogeneityError: If the inputs differ in shape
        """
        loaded = load_directory(input_dir)
        names = tuple(name for name, _ in loaded)
        dataset = prepare_dataset([grid for _, grid in loaded], self.config.normalize)
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        _clear_outputs(output_dir)

        height, width, channels = dataset[0].shape
        job = _SampleJob(
            names=names,
            dataset=tuple(dataset),
            sampler=PatchSampler(self.sampler_config, height, width, len(dataset)),
            blender=get_blender(self.config.mode, self.solver_config),
            output_dir=output_dir,
        )
        logger.info(
            "Generating %d %s samples from %d images (%dx%dx%d) with %d worker(s)",
            self.config.count,
            self.config.mode,
            len(dataset),
            height,
            width,
            channels,
            self.config.workers,
        )

        records = list(self._run(job, progress))
        manifest = CorpusManifest(
            tool_version=_tool_version(),
            rng=RNG_NAME,
            master_seed=self.config.seed,
            mode=self.config.mode,
            normalize=self.config.normalize,
            image_shape=(height, width, channels),
            sampler_config=self.sampler_config.to_dict(),
            solver_config=self.solver_config.to_dict(),
            inputs=names,
            records=tuple(records),
        )
        (output_dir / MANIFEST_NAME).write_text(manifest.to_json() + "\n", encoding="utf-8")

        if manifest.failed:
            logger.warning("%d of %d samples failed", len(manifest.failed), len(records))
        logger.info("Wrote manifest to %s", output_dir / MANIFEST_NAME)
        return manifest

    def _run(
        self, job: _SampleJob, progress: Callable[[int], None] | None
    ) -> Iterator[SampleRecord]:
        indices = range(self.config.count)
        if self.config.workers == 1 or self.config.count < 2:
            for index in indices:
                yield job(index)
                if progress:
                    progress(1)
            return

        with ProcessPoolExecutor(
            max_workers=self.config.workers, initializer=_init_worker, initargs=(job,)
        ) as pool:
            chunksize = max(1, self.config.count // (4 * self.config.workers))
            # map() yields in index order regardless of completion order
            for record in pool.map(_run_worker, indices, chunksize=chunksize):
                yield record
                if progress:
                    progress(1)


def _tool_version() -> str:
    from patchy import __version__

    return __version__


def default_workers() -> int:
    """Worker count from PATCHY_WORKERS, or 1 when unset."""
    value = os.environ.get("PATCHY_WORKERS")
    if not value:
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise ValueError(f"PATCHY_WORKERS must be an integer, got {value!r}")
    if workers < 1:
        raise ValueError(f"PATCHY_WORKERS must be >= 1, got {workers}")
    return workers


def generate_corpus(
    input_dir: str | Path,
    output_dir: str | Path,
    mode: str = "pii",
    count: int = 0,
    sampler_config: SamplerConfig | None = None,
    solver_config: SolverConfig | None = None,
    seed: int = 0,
    workers: int = 1,
    normalize: bool = True,
) -> CorpusManifest:
    """
    One-call corpus generation.

    Args:
        input_dir: Directory of normal images
        output_dir: Where sample files and manifest.json are written
        mode: "fpi" or "pii"
        count: Number of samples
        sampler_config: Patch and alpha ranges
        solver_config: Poisson solver settings
        seed: Master seed
        workers: Worker processes
        normalize: Normalize inputs before blending

    Returns:
        CorpusManifest (also written to output_dir/manifest.json)

    Example:
        >>> manifest = generate_corpus("normals/", "corpus/", mode="pii", count=100, seed=1234)
    """
    config = GeneratorConfig(
        mode=mode, count=count, seed=seed, normalize=normalize, workers=workers
    )
    return CorpusGenerator(config, sampler_config, solver_config).generate(input_dir, output_dir)
