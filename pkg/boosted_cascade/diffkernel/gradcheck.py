import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import NumericError, ParameterError
from .layers import LinearLayer, MlpNetwork, he_init

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradCheckReport:
    max_relative_error: float
    worst_parameter: tuple  # (layer index, parameter name, flat index)
    analytic: float
    numeric: float
    num_checked: int
    tolerance: float

    @property
    def passed(self):
        return self.max_relative_error < self.tolerance

    def describe_worst(self):
        layer, name, index = self.worst_parameter
        return f"layers[{layer}].{name}[{index}]"


def relative_error(a, f):
    return abs(a - f) / max(abs(a), abs(f), 1e-8)


def _total_loss(network, loss_fn, inputs, labels):
    logits = network.forward(inputs, train_mode=False)[0]
    total = float(loss_fn(logits, labels).total)
    if not math.isfinite(total):
        raise NumericError(f"Loss is not finite during gradient check: {total}.")
    return total


def grad_check(network, loss_fn, inputs, labels, epsilon=1e-5, tolerance=1e-4, gradient_hook=None):
    """
    Compares analytic gradients with central finite differences.

    Every parameter w is perturbed to w+epsilon and w-epsilon and
    (L(w+e) - L(w-e)) / 2e is compared with the back-propagated gradient.
    Dropout is never active: all passes run in eval mode.

    Parameters
    ----------
    network : MlpNetwork
    loss_fn : callable
        `loss_fn(logits, labels)` returning an object with `total` and
        `grad_logits` (the gradient of `total`).
    inputs, labels : array-like
    epsilon : float
        Perturbation, within [1e-6, 1e-3].
    tolerance : float
        Pass threshold for the maximum relative error.
    gradient_hook : callable, optional
        Called with the network after back-propagation, before comparing;
        lets tests corrupt analytic gradients on purpose.

    Returns
    -------
    GradCheckReport
    """
    if not 1e-6 <= epsilon <= 1e-3:
        raise ParameterError(f"epsilon must be within [1e-6, 1e-3], got {epsilon}.")

    network.zero_grad()
    logits, cache = network.forward(inputs, train_mode=False)
    breakdown = loss_fn(logits, labels)
    if not math.isfinite(float(breakdown.total)):
        raise NumericError(f"Loss is not finite during gradient check: {breakdown.total}.")
    network.backward(cache, breakdown.grad_logits)
    if gradient_hook is not None:
        gradient_hook(network)

    worst = (-1.0, (0, '', 0), 0.0, 0.0)
    checked = 0
    for layer_idx, name, param, grad in network.parameters():
        flat_param = param.reshape(-1)
        flat_grad = grad.reshape(-1)
        for k in range(flat_param.size):
            original = flat_param[k]
            flat_param[k] = original + epsilon
            plus = _total_loss(network, loss_fn, inputs, labels)
            flat_param[k] = original - epsilon
            minus = _total_loss(network, loss_fn, inputs, labels)
            flat_param[k] = original
            numeric = (plus - minus) / (2.0 * epsilon)
            analytic = float(flat_grad[k])
            err = relative_error(analytic, numeric)
            checked += 1
            if err > worst[0]:
                worst = (err, (layer_idx, name, k), analytic, numeric)

    report = GradCheckReport(max(worst[0], 0.0), worst[1], worst[2], worst[3], checked, tolerance)
    logger.debug(f"Gradient check over {checked} parameters: max relative error "
                 f"{report.max_relative_error:.3e} at {report.describe_worst()}")
    network.zero_grad()
    return report


def random_problem(rng):
    """
    A small random network, inputs and multi-hot labels for gradient
    checking: 2-4 classes, 2-6 inputs, 2-8 hidden units, 3-8 examples.

    Biases are drawn from N(0, 0.1^2) instead of He's zeros.
    The first example is positive and the second negative on every class.

    Returns
    -------
    (MlpNetwork, numpy.ndarray, numpy.ndarray)
    """
    num_classes = int(rng.integers(2, 5))
    in_dim = int(rng.integers(2, 7))
    hidden_dim = int(rng.integers(2, 9))
    n = int(rng.integers(3, 9))
    layers = [he_init(LinearLayer(in_dim, hidden_dim), rng), he_init(LinearLayer(hidden_dim, 2 * num_classes), rng)]
    for layer in layers:
        layer.bias[...] = rng.normal(scale=0.1, size=layer.bias.shape)
    inputs = rng.normal(size=(n, in_dim))
    labels = (rng.random((n, num_classes)) < 0.5).astype(np.int64)
    labels[0], labels[1] = 1, 0
    return MlpNetwork(layers, dropout_p=0.5), inputs, labels
