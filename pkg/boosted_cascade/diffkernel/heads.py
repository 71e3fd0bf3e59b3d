import numpy as np

from ..errors import LayoutError
from .layers import as_tensor2


# Head layout: 2C logits, column 2c is class c's background logit and column
# 2c+1 its positive logit.


def split_pairs(logits):
    """Returns (background, positive) logit matrices of shape (N, C)."""
    z = as_tensor2(logits, 'logits')
    if z.shape[1] % 2:
        raise LayoutError(f"Per-class head needs an even number of logits, got {z.shape[1]}.")
    return z[:, 0::2], z[:, 1::2]


def merge_pairs(background, positive):
    """Inverse of `split_pairs`."""
    n, c = positive.shape
    z = np.empty((n, 2 * c))
    z[:, 0::2] = background
    z[:, 1::2] = positive
    return z


def per_class_softmax_pairs(logits):
    """Softmax over each class's (background, positive) pair, computed with
    max subtraction. Returns the background and positive probabilities."""
    z_bg, z_pos = split_pairs(logits)
    m = np.maximum(z_bg, z_pos)
    e_bg = np.exp(z_bg - m)
    e_pos = np.exp(z_pos - m)
    total = e_bg + e_pos
    return e_bg / total, e_pos / total


def per_class_softmax(logits):
    """Positive-class probability of every (example, class): the
    PredictionMatrix of a 2C-unit head."""
    return per_class_softmax_pairs(logits)[1]


def logit_margin(logits):
    """Positive minus background logit; its sigmoid is the per-class
    softmax output."""
    z_bg, z_pos = split_pairs(logits)
    return z_pos - z_bg


def margin_grad_to_logits(grad_margin):
    """Maps dL/d(margin) of shape (N, C) onto the 2C head logits."""
    return merge_pairs(-grad_margin, grad_margin)
