import logging
from dataclasses import dataclass

import numpy as np

from ..diffkernel.heads import logit_margin, margin_grad_to_logits
from ..errors import DataError
from .base import LossBreakdown, check_labels, check_predictions

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassWeights:
    """Per-class penalty n_c / p_c on errors on positive instances."""
    weights: np.ndarray
    positives: np.ndarray = None
    negatives: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, 'weights', np.asarray(self.weights, dtype=np.float64))

    def __len__(self):
        return self.weights.size


def compute_class_weights(labels, class_names=None):
    """
    Computes w_c = n_c / p_c from a training label matrix.

    A class without positives gets w_c = n_c (as if p_c were 1) and one
    without negatives gets w_c = 1 / p_c (as if n_c were 1); both are logged.
    """
    y = check_labels(labels)
    if y.shape[0] == 0 or y.shape[1] == 0:
        raise DataError("Cannot compute class weights from an empty label matrix.")
    p = y.sum(axis=0)
    n = y.shape[0] - p
    for c in np.flatnonzero(p == 0):
        name = class_names[c] if class_names else c
        logger.warning(f"Class {name} has no positive instances; using weight n={int(n[c])}.")
    for c in np.flatnonzero(n == 0):
        name = class_names[c] if class_names else c
        logger.warning(f"Class {name} has no negative instances; using weight 1/p.")
    weights = np.maximum(n, 1.0) / np.maximum(p, 1.0)
    return ClassWeights(weights, p.astype(np.int64), n.astype(np.int64))


def _breakdown(terms, grad_margin, n, c):
    per_example = terms.mean(axis=1)
    return LossBreakdown(
        total=float(per_example.mean()),
        per_example=per_example,
        per_class=terms.mean(axis=0),
        grad_logits=margin_grad_to_logits(grad_margin / (n * c)),
    )


def weighted_ce(predictions, labels, weights):
    """
    Weighted binary-relevance cross-entropy over per-class probabilities.

    L_i = (1/C) sum_c [ -w_c y_ic ln q_ic - (1 - y_ic) ln(1 - q_ic) ]

    Parameters
    ----------
    predictions : array-like, shape (N, C)
        Positive-class probabilities q.
    labels : array-like, shape (N, C)
        Multi-hot labels.
    weights : ClassWeights

    Returns
    -------
    LossBreakdown
        `grad_logits` is taken with respect to the 2C head logits that
        produce q through the per-class softmax.
    """
    q = check_predictions(predictions)
    y = check_labels(labels, q.shape)
    w = weights.weights
    terms = -w * y * np.log(q) - (1.0 - y) * np.log1p(-q)
    grad_margin = -w * y * (1.0 - q) + (1.0 - y) * q
    return _breakdown(terms, grad_margin, *q.shape)


class WeightedCrossEntropy:
    """Binary-relevance loss family (BR-CE) over the two-unit-per-class head."""

    name = 'BR-CE'
    min_classes = 1

    def __init__(self, class_weights):
        self.class_weights = class_weights

    @classmethod
    def for_training_labels(cls, labels, class_names=None):
        return cls(compute_class_weights(labels, class_names))

    def evaluate(self, logits, labels):
        d = logit_margin(logits)
        y = check_labels(labels, d.shape)
        w = self.class_weights.weights
        # -ln q = log(1 + e^-d), -ln(1-q) = log(1 + e^d)
        terms = w * y * np.logaddexp(0.0, -d) + (1.0 - y) * np.logaddexp(0.0, d)
        q = np.exp(-np.logaddexp(0.0, -d))
        one_minus_q = np.exp(-np.logaddexp(0.0, d))
        grad_margin = -w * y * one_minus_q + (1.0 - y) * q
        return _breakdown(terms, grad_margin, *d.shape)

    __call__ = evaluate

    def from_predictions(self, predictions, labels):
        return weighted_ce(predictions, labels, self.class_weights)

    def to_dict(self):
        return {'family': self.name, 'class_weights': [float(w) for w in self.class_weights.weights]}

    @classmethod
    def from_dict(cls, data):
        return cls(ClassWeights(np.asarray(data['class_weights'], dtype=np.float64)))
