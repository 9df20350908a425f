"""
Image-level scoring and average precision.

Score maps are reduced to one score per image (or per clip of frames),
ranked, and summarized as a precision-recall curve, its average precision
and per-class score histograms.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Hashable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from patchy.errors import BadKError, EmptyInputError, EmptyMapError, NoPositivesError
from patchy.supervision.labels import ScoreMap

AggregationMethod = Literal["mean", "max", "top_k_mean"]
AGGREGATIONS: tuple[str, ...] = ("mean", "max", "top_k_mean")
CLIP_AGGREGATIONS: tuple[str, ...] = ("mean", "max")


@dataclass(frozen=True)
class ScoredSample:
    """
    One image (or clip) with its scalar anomaly score and ground truth.

    Attributes:
        id: Caller's identifier
        score: Finite anomaly score, higher means more anomalous
        is_anomalous: Ground truth
    """
    id: str
    score: float
    is_anomalous: bool

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ValueError(f"Score of {self.id!r} is not finite: {self.score}")


@dataclass(frozen=True)
class PRPoint:
    """Precision and recall when every sample scoring >= threshold is flagged."""
    threshold: float
    recall: float
    precision: float


@dataclass(frozen=True)
class PRCurve:
    """
    Precision-recall curve over descending score thresholds.

    Attributes:
        points: One point per distinct score, highest threshold first
        average_precision: sum_n (R_n - R_{n-1}) P_n
    """
    points: tuple[PRPoint, ...]
    average_precision: float

    @property
    def recall(self) -> NDArray[np.float64]:
        return np.array([p.recall for p in self.points])

    @property
    def precision(self) -> NDArray[np.float64]:
        return np.array([p.precision for p in self.points])


@dataclass(frozen=True)
class ScoreHistogram:
    """
    Histograms of normal and anomalous scores on shared bins.

    Attributes:
        edges: Bin edges, len(counts) + 1 values
        normal: Counts of normal samples per bin
        anomalous: Counts of anomalous samples per bin
    """
    edges: tuple[float, ...]
    normal: tuple[int, ...]
    anomalous: tuple[int, ...]


def aggregate_score(
    score_map: ScoreMap, method: AggregationMethod | str = "mean", k: int | None = None
) -> float:
    """
    Reduce a score map to one image-level score.

    Args:
        score_map: Per-pixel scores
        method: "mean", "max" or "top_k_mean"
        k: Number of highest pixels to average for top_k_mean

    Raises:
        EmptyMapError: If the map has no pixels
        BadKError: If k is not in 1..pixel count for top_k_mean
    """
    values = score_map.data.ravel()
    if values.size == 0:
        raise EmptyMapError("Score map has no pixels")
    if method == "mean":
        return float(values.mean())
    elif method == "max":
        return float(values.max())
    elif method == "top_k_mean":
        if k is None or not 1 <= k <= values.size:
            raise BadKError(f"k must lie in 1..{values.size}, got {k}")
        top = np.partition(values, values.size - k)[values.size - k :]
        return float(np.sort(top).mean())
    else:
        raise ValueError(f"Unknown aggregation {method!r}; use one of {AGGREGATIONS}")


def clip_score(frames: Sequence[float], method: str = "mean") -> float:
    """
    Reduce frame-level scores of one clip to a clip-level score.

    Raises:
        EmptyInputError: If frames is empty
    """
    if len(frames) == 0:
        raise EmptyInputError("Clip has no frames")
    values = np.asarray(frames, dtype=np.float64)
    if method == "mean":
        return float(values.mean())
    elif method == "max":
        return float(values.max())
    else:
        raise ValueError(f"Unknown clip aggregation {method!r}; use one of {CLIP_AGGREGATIONS}")


def clip_samples(
    samples: Sequence[ScoredSample],
    clip_of: Callable[[ScoredSample], Hashable],
    method: str = "mean",
) -> list[ScoredSample]:
    """
    Group frame-level samples into clip-level samples.

    A clip is anomalous if any of its frames is. Clips keep the order in
    which they first appear.

    Args:
        samples: Frame-level samples
        clip_of: Maps a frame sample to its clip key
        method: "mean" or "max" over the clip's frame scores
    """
    groups: dict[Hashable, list[ScoredSample]] = {}
    for s in samples:
        groups.setdefault(clip_of(s), []).append(s)
    return [
        ScoredSample(
            id=str(key),
            score=clip_score([f.score for f in frames], method),
            is_anomalous=any(f.is_anomalous for f in frames),
        )
        for key, frames in groups.items()
    ]


def average_precision(samples: Sequence[ScoredSample]) -> PRCurve:
    """
    Precision-recall curve and average precision.

    Thresholds walk the distinct scores from high to low; samples with equal
    scores enter together, so the result does not depend on their order.
    AP is the step-wise sum of recall increments times precision.

    Raises:
        NoPositivesError: If no sample is anomalous
    """
    positives = sum(1 for s in samples if s.is_anomalous)
    if positives == 0:
        raise NoPositivesError("Average precision needs at least one anomalous sample")

    scores = np.array([s.score for s in samples], dtype=np.float64)
    truth = np.array([s.is_anomalous for s in samples], dtype=np.int64)
    order = np.argsort(-scores, kind="stable")
    scores = scores[order]
    truth = truth[order]

    # last index of each tie group
    group_end = np.flatnonzero(np.append(scores[1:] != scores[:-1], True))
    tp = np.cumsum(truth)[group_end]
    flagged = group_end + 1

    recall = tp / positives
    precision = tp / flagged
    previous = np.concatenate([[0.0], recall[:-1]])
    ap = float(np.sum((recall - previous) * precision))

    points = tuple(
        PRPoint(threshold=float(scores[e]), recall=float(r), precision=float(p))
        for e, r, p in zip(group_end, recall, precision)
    )
    return PRCurve(points=points, average_precision=min(max(ap, 0.0), 1.0))


def score_histogram(samples: Sequence[ScoredSample], bins: int = 10) -> ScoreHistogram:
    """
    Per-class histograms over the combined score range.

    If every score is equal the range is degenerate and a single bin holds all mass.

    Raises:
        EmptyInputError: If samples is empty
        ValueError: If bins < 1
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if len(samples) == 0:
        raise EmptyInputError("No samples to histogram")

    scores = np.array([s.score for s in samples], dtype=np.float64)
    anomalous = np.array([s.is_anomalous for s in samples], dtype=bool)
    lo, hi = float(scores.min()), float(scores.max())
    if lo == hi:
        edges = np.array([lo, hi])
        index = np.zeros(scores.size, dtype=np.intp)
    else:
        edges = np.linspace(lo, hi, bins + 1)
        # right-closed last bin, as numpy.histogram
        index = np.clip(np.searchsorted(edges, scores, side="right") - 1, 0, bins - 1)

    n_bins = edges.size - 1
    normal_counts = np.bincount(index[~anomalous], minlength=n_bins)
    anomalous_counts = np.bincount(index[anomalous], minlength=n_bins)
    return ScoreHistogram(
        edges=tuple(float(e) for e in edges),
        normal=tuple(int(c) for c in normal_counts),
        anomalous=tuple(int(c) for c in anomalous_counts),
    )


def write_pr_curve_csv(curve: PRCurve, path: str | Path) -> None:
    """Columns: threshold, recall, precision (one row per distinct score)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["threshold", "recall", "precision"])
        for p in curve.points:
            writer.writerow([repr(p.threshold), repr(p.recall), repr(p.precision)])


def write_histogram_csv(histogram: ScoreHistogram, path: str | Path) -> None:
    """Columns: bin_start, bin_end, normal, anomalous."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["bin_start", "bin_end", "normal", "anomalous"])
        for i, (n, a) in enumerate(zip(histogram.normal, histogram.anomalous)):
            writer.writerow([repr(histogram.edges[i]), repr(histogram.edges[i + 1]), n, a])
