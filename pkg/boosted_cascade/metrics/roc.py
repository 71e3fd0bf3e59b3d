from dataclasses import dataclass

import numpy as np

from ..errors import DataError, DimensionError, LabelError, NumericError


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray  # descending, first entry +inf for the (0, 0) point
    tpr: np.ndarray
    fpr: np.ndarray

    def area(self):
        return float(np.sum(np.diff(self.fpr) * (self.tpr[1:] + self.tpr[:-1]) / 2.0))


def _check(scores, labels):
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if s.size != y.size:
        raise DimensionError(f"Got {s.size} scores for {y.size} labels.")
    if not np.all(np.isfinite(s)):
        raise NumericError("Scores must be finite.")
    if not np.all((y == 0) | (y == 1)):
        raise LabelError("AUC labels must be 0 or 1.")
    return s, y.astype(np.int64)


def is_defined(labels):
    y = np.asarray(labels).reshape(-1)
    return bool(np.any(y == 1) and np.any(y == 0))


def roc_curve(scores, labels):
    """
    ROC curve from a sweep over the distinct scores, highest first. Tied
    scores form a single threshold step.

    Raises
    ------
    DataError
        When labels hold only one class.
    """
    s, y = _check(scores, labels)
    if not is_defined(y):
        raise DataError("ROC curve needs at least one positive and one negative label.")
    order = np.argsort(-s, kind='stable')
    s_sorted = s[order]
    y_sorted = y[order]
    # last index of every run of equal scores
    step_ends = np.r_[np.flatnonzero(np.diff(s_sorted) != 0), s.size - 1]
    tps = np.cumsum(y_sorted)[step_ends]
    fps = (step_ends + 1) - tps
    return RocCurve(
        thresholds=np.r_[np.inf, s_sorted[step_ends]],
        tpr=np.r_[0.0, tps / tps[-1]],
        fpr=np.r_[0.0, fps / fps[-1]],
    )


def roc_auc(scores, labels):
    """Trapezoidal area under the ROC curve, or None when the labels hold a
    single class (the AUC is undefined)."""
    s, y = _check(scores, labels)
    if not is_defined(y):
        return None
    return roc_curve(s, y).area()


def auc_oracle(scores, labels):
    """Mann-Whitney AUC by enumerating every (positive, negative) pair; ties
    count one half. Quadratic in the number of examples."""
    s, y = _check(scores, labels)
    if not is_defined(y):
        return None
    pos = s[y == 1][:, None]
    neg = s[y == 0][None, :]
    wins = (pos > neg).sum() + 0.5 * (pos == neg).sum()
    return float(wins / (pos.size * neg.size))
