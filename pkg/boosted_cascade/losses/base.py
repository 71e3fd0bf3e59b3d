from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DimensionError, LabelError, NumericError

# largest float below 1 and smallest normal float above 0
_Q_MAX = np.nextafter(1.0, 0.0)
_Q_MIN = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class LossBreakdown:
    """
    Result of a loss evaluation.

    Attributes
    ----------
    total : float
        Mean of `per_example`.
    per_example : numpy.ndarray
        One non-negative loss per example; drives difficulty ranking.
    per_class : numpy.ndarray or None
        Mean term per class (cross-entropy only).
    grad_logits : numpy.ndarray
        Gradient of `total` with respect to the 2C head logits.
    """
    total: float
    per_example: np.ndarray
    per_class: Optional[np.ndarray]
    grad_logits: np.ndarray


def check_labels(labels, shape=None):
    y = np.asarray(labels)
    if y.ndim != 2:
        raise DimensionError(f"Labels must be a 2-D multi-hot matrix, got shape {y.shape}.")
    if shape is not None and y.shape != tuple(shape):
        raise DimensionError(f"Labels shape {y.shape} does not match predictions {tuple(shape)}.")
    if not np.all((y == 0) | (y == 1)):
        bad = y[(y != 0) & (y != 1)].flat[0]
        raise LabelError(f"Labels must be 0 or 1, found {bad!r}.")
    return y.astype(np.float64)


def check_predictions(predictions):
    q = np.asarray(predictions, dtype=np.float64)
    if q.ndim != 2:
        raise DimensionError(f"Predictions must be 2-D, got shape {q.shape}.")
    if not np.all(np.isfinite(q)) or np.any(q < 0.0) or np.any(q > 1.0):
        raise NumericError("Predictions must be finite probabilities in [0, 1].")
    # saturated averages may hit 0 or 1 exactly; keep the logs finite
    return np.clip(q, _Q_MIN, _Q_MAX)
