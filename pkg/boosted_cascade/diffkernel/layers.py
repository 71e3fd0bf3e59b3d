import math

import numpy as np

from ..errors import DimensionError, NumericError, ParameterError
from .rng import make_rng


def as_tensor2(values, name='input'):
    """Returns `values` as a finite 2-D float64 array (the Tensor2 of the
    kernel), raising DimensionError or NumericError otherwise."""
    t = np.asarray(values, dtype=np.float64)
    if t.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {t.shape}.")
    if not np.all(np.isfinite(t)):
        raise NumericError(f"{name} contains non-finite values.")
    return t


class LinearLayer:
    """
    A fully connected layer computing `x @ weight.T + bias`.

    Attributes
    ----------
    weight : numpy.ndarray
        Parameters of shape (out_dim, in_dim).
    bias : numpy.ndarray
        Parameters of shape (out_dim,).
    weight_grad, bias_grad : numpy.ndarray
        Accumulated gradients, same shapes as the parameters.
    weight_velocity, bias_velocity : numpy.ndarray
        Momentum buffers, same shapes as the parameters.
    """

    def __init__(self, in_dim, out_dim):
        if in_dim < 1 or out_dim < 1:
            raise DimensionError(f"Layer dimensions must be positive, got {in_dim}x{out_dim}.")
        self.weight = np.zeros((out_dim, in_dim))
        self.bias = np.zeros(out_dim)
        self.weight_grad = np.zeros_like(self.weight)
        self.bias_grad = np.zeros_like(self.bias)
        self.weight_velocity = np.zeros_like(self.weight)
        self.bias_velocity = np.zeros_like(self.bias)

    @property
    def in_dim(self):
        return self.weight.shape[1]

    @property
    def out_dim(self):
        return self.weight.shape[0]

    def forward(self, x):
        return x @ self.weight.T + self.bias

    def zero_grad(self):
        self.weight_grad[...] = 0.0
        self.bias_grad[...] = 0.0

    def parameters(self):
        """Returns (name, parameter, gradient, velocity) tuples."""
        return [
            ('weight', self.weight, self.weight_grad, self.weight_velocity),
            ('bias', self.bias, self.bias_grad, self.bias_velocity),
        ]


def he_std(in_dim):
    if in_dim < 1:
        raise DimensionError(f"He initialization needs a positive fan-in, got {in_dim}.")
    return math.sqrt(2.0 / in_dim)


def he_init(layer, rng_seed):
    """
    Draws `layer.weight` from N(0, 2/in_dim) and zeroes the bias, in place.

    Parameters
    ----------
    layer : LinearLayer
        Layer to initialize.
    rng_seed : int or numpy.random.Generator
        Seed of the draw; the same seed gives bit-identical weights.

    Returns
    -------
    LinearLayer
        The same layer, for chaining.
    """
    std = he_std(layer.in_dim)
    rng = make_rng(rng_seed)
    layer.weight[...] = rng.normal(0.0, std, size=layer.weight.shape)
    layer.bias[...] = 0.0
    layer.zero_grad()
    return layer


def relu(z):
    return np.maximum(z, 0.0)


def dropout_mask(shape, p, rng):
    """Inverted dropout mask: kept units are scaled by 1/(1-p), so the
    expectation of a masked activation equals the unmasked one."""
    keep = rng.random(shape) >= p
    return keep / (1.0 - p)


class MlpNetwork:
    """
    A stack of LinearLayers with ReLU and dropout between consecutive layers
    and no activation after the last one (it emits raw logits).

    `forward` never modifies the network; the activations needed by
    `backward` are returned in a cache instead. Eval-mode forward passes on
    one network may therefore run concurrently.
    """

    def __init__(self, layers, dropout_p=0.0):
        if not layers:
            raise DimensionError("A network needs at least one layer.")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise DimensionError(f"Layer output {prev.out_dim} does not match next input {nxt.in_dim}.")
        if not 0.0 <= dropout_p < 1.0:
            raise ParameterError(f"Dropout rate must be in [0, 1), got {dropout_p}.")
        self.layers = list(layers)
        self.dropout_p = float(dropout_p)

    @property
    def in_dim(self):
        return self.layers[0].in_dim

    @property
    def out_dim(self):
        return self.layers[-1].out_dim

    def forward(self, x, train_mode=False, rng=None):
        x = as_tensor2(x)
        if x.shape[1] != self.in_dim:
            raise DimensionError(f"Network expects {self.in_dim} input columns, got {x.shape[1]}.")
        use_dropout = train_mode and self.dropout_p > 0.0
        if use_dropout:
            if rng is None:
                raise ParameterError("Train-mode dropout needs an rng.")
            rng = make_rng(rng)
        cache = {'inputs': [], 'pre': [], 'masks': []}
        h = x
        last = len(self.layers) - 1
        for idx, layer in enumerate(self.layers):
            cache['inputs'].append(h)
            z = layer.forward(h)
            if idx == last:
                return z, cache
            cache['pre'].append(z)
            h = relu(z)
            mask = dropout_mask(h.shape, self.dropout_p, rng) if use_dropout else None
            if mask is not None:
                h = h * mask
            cache['masks'].append(mask)

    def backward(self, cache, grad_logits):
        """Accumulates parameter gradients given dLoss/dlogits; returns
        dLoss/dinput."""
        g = np.asarray(grad_logits, dtype=np.float64)
        for idx in reversed(range(len(self.layers))):
            layer = self.layers[idx]
            layer.weight_grad += g.T @ cache['inputs'][idx]
            layer.bias_grad += g.sum(axis=0)
            g = g @ layer.weight
            if idx > 0:
                mask = cache['masks'][idx - 1]
                if mask is not None:
                    g = g * mask
                g = g * (cache['pre'][idx - 1] > 0.0)
        return g

    def predict_logits(self, x):
        return self.forward(x, train_mode=False)[0]

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()

    def parameters(self):
        """Returns (layer index, name, parameter, gradient) for every parameter."""
        return [(i, name, p, g) for i, layer in enumerate(self.layers)
                for name, p, g, _ in layer.parameters()]


def forward_mlp(input, layers, dropout_p, train_mode, rng_seed=None):
    """Functional form of `MlpNetwork.forward`, returning the raw logits."""
    network = MlpNetwork(layers, dropout_p)
    return network.forward(input, train_mode=train_mode, rng=rng_seed)[0]
