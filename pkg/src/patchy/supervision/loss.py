"""
Pixel-wise binary cross-entropy regression of the interpolation factor.

    L = -y log(A) - (1 - y) log(1 - A), averaged over pixels

For a fractional label y the minimum over A is the binary entropy H(y),
reached at A = y.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from patchy.errors import ShapeMismatchError
from patchy.supervision.labels import SCORE_EPS, LabelMap, ScoreMap


def _check(label: LabelMap, score: ScoreMap) -> None:
    if label.shape != score.shape:
        raise ShapeMismatchError(f"Label shape {label.shape} vs score shape {score.shape}")


def pointwise_bce(label: LabelMap, score: ScoreMap) -> NDArray[np.float64]:
    """Per-pixel loss, shape (height, width)."""
    _check(label, score)
    y = label.data
    a = np.clip(score.data, SCORE_EPS, 1.0 - SCORE_EPS)
    return -(y * np.log(a) + (1.0 - y) * np.log1p(-a))


def bce_loss(label: LabelMap, score: ScoreMap) -> float:
    """
    Mean pixel-wise binary cross-entropy.

    Raises:
        ShapeMismatchError: If the maps differ in shape
    """
    return float(pointwise_bce(label, score).mean())


def bce_loss_gradient(label: LabelMap, score: ScoreMap) -> NDArray[np.float64]:
    """
    Derivative of bce_loss with respect to each score.

    dL/dA = (A - y) / (A (1 - A)) / pixel_count

    Raises:
        ShapeMismatchError: If the maps differ in shape
    """
    _check(label, score)
    y = label.data
    a = np.clip(score.data, SCORE_EPS, 1.0 - SCORE_EPS)
    return (a - y) / (a * (1.0 - a)) / a.size


def binary_entropy(y: ArrayLike) -> NDArray[np.float64]:
    """H(y) = -y log y - (1 - y) log(1 - y), with H(0) = H(1) = 0."""
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(y * np.log(y) + (1.0 - y) * np.log1p(-y))
    return np.where((y <= 0.0) | (y >= 1.0), 0.0, h)
