"""
Command-line interface.

    patchy generate INPUT_DIR OUTPUT_DIR --mode pii --count 1000 --seed 1234
    patchy blend DEST SOURCE OUTPUT --top 40 --left 40 --height 24 --width 24 --alpha 0.8
    patchy evaluate SCORES_DIR LABELS_CSV --aggregation top_k_mean --k 100

Exit status: 0 success, 1 usage error, 2 partial failure (some samples
failed), 3 fatal error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

from patchy.errors import BadKError, MalformedScoreMapError, MissingLabelError, PatchyError

logger = logging.getLogger("patchy")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2
EXIT_FATAL = 3

SCORE_MAP_EXTENSIONS = (".raw", ".piig", ".f32")
TRUE_LABELS = {"1", "true", "yes", "anomalous"}
FALSE_LABELS = {"0", "false", "no", "normal"}


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit status 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _range(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="patchy",
        description="Synthesize self-supervised anomaly training data by patch blending.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    gen = sub.add_parser(
        "generate",
        help="Generate a seeded corpus of augmented samples",
        description=(
            "Blend random patches between images of INPUT_DIR and write NNNNNN_img.raw, "
            "NNNNNN_lbl.raw (raw_f32) and manifest.json to OUTPUT_DIR."
        ),
    )
    gen.add_argument("input_dir", type=Path, help="Directory of normal images")
    gen.add_argument("output_dir", type=Path, help="Corpus output directory")
    gen.add_argument("--mode", choices=("fpi", "pii"), default="pii", help="Blend mode")
    gen.add_argument("-n", "--count", type=int, default=100, help="Samples (default: 100)")
    gen.add_argument("-s", "--seed", type=int, default=0, help="Master seed (default: 0)")
    gen.add_argument("--size-range", nargs=2, type=_range, default=(0.1, 0.4),
                     metavar=("LO", "HI"), help="Patch side as a fraction of the axis")
    gen.add_argument("--center-range", nargs=2, type=_range, default=(0.1, 0.9),
                     metavar=("LO", "HI"), help="Patch center as a fraction of the axis")
    gen.add_argument("--alpha-range", nargs=2, type=_range, default=(0.05, 0.95),
                     metavar=("LO", "HI"), help="Interpolation factor range")
    _add_solver_arguments(gen)
    gen.add_argument("-j", "--workers", type=int, default=None,
                     help="Worker processes (default: $PATCHY_WORKERS or 1)")
    gen.add_argument("--no-normalize", action="store_true",
                     help="Blend raw intensities instead of per-image normalized ones")

    blend = sub.add_parser("blend", help="Blend one patch and write the image and its label")
    blend.add_argument("dest", type=Path, help="Destination image")
    blend.add_argument("source", type=Path, help="Source image")
    blend.add_argument("output", type=Path, help="Output image (format from extension)")
    blend.add_argument("--label", type=Path, default=None,
                       help="Label output (default: OUTPUT stem + _lbl.raw)")
    blend.add_argument("--top", type=int, required=True, help="First patch row")
    blend.add_argument("--left", type=int, required=True, help="First patch column")
    blend.add_argument("--height", type=int, required=True, help="Patch rows")
    blend.add_argument("--width", type=int, required=True, help="Patch columns")
    blend.add_argument("--alpha", type=_range, required=True, help="Interpolation factor")
    blend.add_argument("--mode", choices=("fpi", "pii"), default="pii", help="Blend mode")
    _add_solver_arguments(blend)

    ev = sub.add_parser(
        "evaluate",
        help="Compute average precision of score maps",
        description=(
            "Score maps are single-channel raw_f32 files named <id>.raw with values in [0, 1]. "
            "LABELS_CSV has columns id,label and optionally clip."
        ),
    )
    ev.add_argument("scores_dir", type=Path, help="Directory of score maps")
    ev.add_argument("labels", type=Path, help="Ground-truth CSV")
    ev.add_argument("--aggregation", choices=("mean", "max", "top_k_mean"), default="mean",
                    help="Map-to-image score reduction")
    ev.add_argument("--k", type=int, default=None, help="Pixels averaged by top_k_mean")
    ev.add_argument("--clip-aggregation", choices=("mean", "max"), default=None,
                    help="Score clips instead of images, reducing frame scores this way")
    ev.add_argument("--bins", type=int, default=10, help="Histogram bins (default: 10)")
    ev.add_argument("-o", "--output-dir", type=Path, default=Path("."),
                    help="Where average_precision.txt, pr_curve.csv and histogram.csv go")

    return parser


def _add_solver_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--solver", choices=("conjugate_gradient", "direct_dense"),
                        default="conjugate_gradient", help="Poisson solver")
    parser.add_argument("--rtol", type=float, default=1e-8,
                        help="Relative residual tolerance (default: 1e-8)")
    parser.add_argument("--max-iterations", type=int, default=None,
                        help="Iteration cap (default: 10x the patch pixel count)")


def _solver_config(args: argparse.Namespace) -> Any:
    from patchy.blending import SolverConfig

    return SolverConfig(
        rel_tolerance=args.rtol, max_iterations=args.max_iterations, method=args.solver
    )


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _progress_bar(total: int, quiet: bool) -> Any:
    """tqdm bar if the progress extra is installed, else None."""
    try:
        from tqdm import tqdm
    except ImportError:
        return None
    return tqdm(total=total, unit="sample", disable=quiet)


def cmd_generate(args: argparse.Namespace) -> int:
    from patchy.core.generator import CorpusGenerator, GeneratorConfig, default_workers
    from patchy.core.sampler import SamplerConfig

    config = GeneratorConfig(
        mode=args.mode,
        count=args.count,
        seed=args.seed,
        normalize=not args.no_normalize,
        workers=args.workers if args.workers is not None else default_workers(),
    )
    sampler_config = SamplerConfig(
        size_fraction_range=tuple(args.size_range),
        center_fraction_range=tuple(args.center_range),
        alpha_range=tuple(args.alpha_range),
        seed=args.seed,
    )
    generator = CorpusGenerator(config, sampler_config, _solver_config(args))

    bar = _progress_bar(config.count, args.quiet)
    try:
        manifest = generator.generate(
            args.input_dir, args.output_dir, progress=bar.update if bar else None
        )
    finally:
        if bar:
            bar.close()

    stats = manifest.overshoot_stats()
    print(
        f"{len(manifest.records) - len(manifest.failed)} samples written, "
        f"{len(manifest.failed)} failed, {stats['overshoot_samples']} overshooting"
    )
    return EXIT_PARTIAL if manifest.failed else EXIT_OK


def cmd_blend(args: argparse.Namespace) -> int:
    from patchy.blending import get_blender
    from patchy.core.schema import PatchRegion, PatchSpec
    from patchy.files import load_image, save_image

    dest = load_image(args.dest)
    source = load_image(args.source)
    region = PatchRegion.inside(args.top, args.left, args.height, args.width,
                                dest.height, dest.width)
    spec = PatchSpec(region=region, alpha=args.alpha)

    sample = get_blender(args.mode, _solver_config(args)).augment(dest, source, spec)
    label_path = args.label or args.output.with_name(f"{args.output.stem}_lbl.raw")
    save_image(sample.image, args.output)
    save_image(sample.label.to_image(), label_path, "raw_f32")
    logger.info("Wrote %s and %s", args.output, label_path)

    if sample.solver_stats is not None:
        print(
            f"residual_norm={sample.solver_stats.residual_norm:.3e} "
            f"iterations={sample.solver_stats.iterations}"
        )
    return EXIT_OK


def read_labels(path: Path) -> dict[str, tuple[bool, str | None]]:
    """
    Read a ground-truth CSV with columns id, label and optional clip.

    Returns:
        Mapping of id to (is_anomalous, clip or None)
    """
    labels: dict[str, tuple[bool, str | None]] = {}
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        fields = set(reader.fieldnames or ())
        if not {"id", "label"} <= fields:
            raise ValueError(f"{path} needs 'id' and 'label' columns, has {sorted(fields)}")
        for row in reader:
            value = row["label"].strip().lower()
            if value in TRUE_LABELS:
                anomalous = True
            elif value in FALSE_LABELS:
                anomalous = False
            else:
                raise ValueError(f"Unrecognised label {row['label']!r} for {row['id']!r}")
            clip = row.get("clip") or None
            labels[row["id"].strip()] = (anomalous, clip)
    return labels


def cmd_evaluate(args: argparse.Namespace) -> int:
    from patchy.errors import DomainError, FormatError
    from patchy.evaluation import (
        ScoredSample,
        aggregate_score,
        average_precision,
        clip_samples,
        score_histogram,
        write_histogram_csv,
        write_pr_curve_csv,
    )
    from patchy.files import load_image
    from patchy.supervision import ScoreMap

    labels = read_labels(args.labels)
    paths = sorted(
        p for p in args.scores_dir.iterdir()
        if p.is_file() and p.suffix.lower() in SCORE_MAP_EXTENSIONS
    )

    samples: list[ScoredSample] = []
    clips: dict[str, str | None] = {}
    for path in paths:
        sample_id = path.stem
        if sample_id not in labels:
            raise MissingLabelError(f"No ground-truth label for score map {path.name}")
        try:
            score_map = ScoreMap.from_image(load_image(path, "raw_f32"))
        except (FormatError, DomainError) as exc:
            raise MalformedScoreMapError(f"{path.name}: {exc}") from exc
        anomalous, clip = labels[sample_id]
        clips[sample_id] = clip
        samples.append(ScoredSample(
            id=sample_id,
            score=aggregate_score(score_map, args.aggregation, args.k),
            is_anomalous=anomalous,
        ))

    unused = len(labels) - len(samples)
    if unused:
        logger.warning("%d labelled ids have no score map", unused)

    if args.clip_aggregation:
        samples = clip_samples(
            samples, lambda s: clips[s.id] or s.id, method=args.clip_aggregation
        )

    curve = average_precision(samples)
    histogram = score_histogram(samples, bins=args.bins)

    args.output_dir.mkdir(parents=True, exist_ok=True)
    (args.output_dir / "average_precision.txt").write_text(
        f"{curve.average_precision:.6f}\n", encoding="utf-8"
    )
    write_pr_curve_csv(curve, args.output_dir / "pr_curve.csv")
    write_histogram_csv(histogram, args.output_dir / "histogram.csv")
    logger.info("Evaluated %d samples", len(samples))

    print(f"{curve.average_precision:.6f}")
    return EXIT_OK


def _check_arguments(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """Reject option combinations argparse cannot express; exits with EXIT_USAGE."""
    if args.command != "evaluate":
        return
    if args.aggregation == "top_k_mean" and (args.k is None or args.k < 1):
        parser.error("--aggregation top_k_mean needs --k >= 1")
    if args.bins < 1:
        parser.error(f"--bins must be >= 1, got {args.bins}")


COMMANDS = {
    "generate": cmd_generate,
    "blend": cmd_blend,
    "evaluate": cmd_evaluate,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_arguments(parser, args)
    _configure_logging(args)

    try:
        return COMMANDS[args.command](args)
    except BadKError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except PatchyError as exc:
        logger.error("%s", exc)
        return EXIT_FATAL
    except ValueError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
