"""Evaluation: image- and clip-level scores, average precision, histograms."""

from patchy.evaluation.metrics import (
    AGGREGATIONS,
    CLIP_AGGREGATIONS,
    PRCurve,
    PRPoint,
    ScoredSample,
    ScoreHistogram,
    aggregate_score,
    average_precision,
    clip_samples,
    clip_score,
    score_histogram,
    write_histogram_csv,
    write_pr_curve_csv,
)

__all__ = [
    "ScoredSample",
    "PRPoint",
    "PRCurve",
    "ScoreHistogram",
    "aggregate_score",
    "average_precision",
    "score_histogram",
    "clip_score",
    "clip_samples",
    "write_pr_curve_csv",
    "write_histogram_csv",
    "AGGREGATIONS",
    "CLIP_AGGREGATIONS",
]
