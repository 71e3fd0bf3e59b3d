import numpy as np

from ..diffkernel.heads import margin_grad_to_logits, per_class_softmax_pairs
from .base import LossBreakdown, check_labels, check_predictions


def _pwe(s, y, slope):
    """Loss terms and margin gradient of the smooth pairwise error.

    The double sum over (positive u, negative v) pairs factorizes:
    sum_u sum_v exp(s_v - s_u) = (sum_v exp(s_v)) * (sum_u exp(-s_u)).
    `slope` is ds/d(margin), i.e. s * (1 - s).
    """
    pos = y
    neg = 1.0 - y
    e_pos = np.exp(s)
    e_neg = np.exp(-s)
    a = (e_pos * neg).sum(axis=1)
    b = (e_neg * pos).sum(axis=1)
    pair_sum = a * b
    per_example = np.log1p(pair_sum)
    grad_s = (neg * e_pos * b[:, None] - pos * e_neg * a[:, None]) / (1.0 + pair_sum)[:, None]
    n = s.shape[0]
    return LossBreakdown(
        total=float(per_example.mean()),
        per_example=per_example,
        per_class=None,
        grad_logits=margin_grad_to_logits(grad_s * slope / n),
    )


def smooth_pwe(scores, labels):
    """
    Smooth pairwise-error ranking loss.

    L_i = ln(1 + sum_{u in Y+} sum_{v in Y-} exp(s_iv - s_iu))

    Rows whose positive or negative set is empty contribute 0. The pair
    count is not normalized away.

    Parameters
    ----------
    scores : array-like, shape (N, C)
        Sigmoid scores in (0, 1).
    labels : array-like, shape (N, C)

    Returns
    -------
    LossBreakdown
        `grad_logits` is taken with respect to the 2C head logits whose
        logit differences are the pre-sigmoid scores.
    """
    s = check_predictions(scores)
    y = check_labels(labels, s.shape)
    return _pwe(s, y, s * (1.0 - s))


class SmoothPairwiseError:
    """Pairwise ranking loss family (PWE)."""

    name = 'PWE'
    min_classes = 2

    @classmethod
    def for_training_labels(cls, labels, class_names=None):
        return cls()

    def evaluate(self, logits, labels):
        q_bg, s = per_class_softmax_pairs(logits)
        y = check_labels(labels, s.shape)
        return _pwe(s, y, s * q_bg)

    __call__ = evaluate

    def from_predictions(self, predictions, labels):
        return smooth_pwe(predictions, labels)

    def to_dict(self):
        return {'family': self.name}

    @classmethod
    def from_dict(cls, data):
        return cls()
