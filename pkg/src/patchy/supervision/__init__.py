"""Label maps, score maps and the interpolation-factor regression loss."""

from patchy.supervision.labels import SCORE_EPS, LabelMap, ScoreMap, make_label
from patchy.supervision.loss import bce_loss, bce_loss_gradient, binary_entropy, pointwise_bce

__all__ = [
    "LabelMap",
    "ScoreMap",
    "SCORE_EPS",
    "make_label",
    "bce_loss",
    "bce_loss_gradient",
    "pointwise_bce",
    "binary_entropy",
]
