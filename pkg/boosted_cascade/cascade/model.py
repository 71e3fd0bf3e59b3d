import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..diffkernel.heads import per_class_softmax
from ..diffkernel.layers import LinearLayer, MlpNetwork, as_tensor2, he_init
from ..diffkernel.rng import STREAM_INIT, make_rng
from ..config import setting_bool, setting_int, setting_real
from ..errors import ConfigError, DimensionError, StateError

logger = logging.getLogger(__name__)

DEFAULT_NUM_LEVELS = 6
DEFAULT_HIDDEN_DIM = 64
DEFAULT_DROPOUT = 0.5


class CascadeLevel:
    """One stage of the cascade: two fully connected layers with ReLU and
    dropout between them, ending in a two-unit-per-class head (level 0 may
    be a single linear layer). A level is frozen once its training phase
    ends."""

    def __init__(self, index, network, frozen=False):
        self.index = index
        self.network = network
        self.frozen = frozen

    @property
    def input_dim(self):
        return self.network.in_dim

    @property
    def num_classes(self):
        return self.network.out_dim // 2

    def logits(self, inputs):
        return self.network.predict_logits(inputs)

    def predict(self, inputs):
        """Eval-mode positive-class probabilities, shape (N, C)."""
        return per_class_softmax(self.logits(inputs))

    def freeze(self):
        self.frozen = True


class CascadeModel:
    """
    Ordered cascade levels. Level 0 maps the raw features to 2C logits;
    level l >= 1 reads the class probabilities of levels 0..l-1 (preceded by
    the raw features when `include_base_features` is set).
    """

    def __init__(self, levels, num_classes, base_feature_dim, include_base_features=False,
                 hidden_dim=DEFAULT_HIDDEN_DIM, dropout=DEFAULT_DROPOUT, seed=0, base_hidden_dim=None):
        if not levels:
            raise DimensionError("A cascade needs at least one level.")
        self.levels = list(levels)
        self.num_classes = num_classes
        self.base_feature_dim = base_feature_dim
        self.include_base_features = include_base_features
        self.hidden_dim = hidden_dim
        self.base_hidden_dim = base_hidden_dim
        self.dropout = dropout
        self.seed = seed
        for l, level in enumerate(self.levels):
            if level.input_dim != self.expected_input_dim(l):
                raise DimensionError(f"Level {l} reads {level.input_dim} inputs, expected {self.expected_input_dim(l)}.")
            if level.num_classes != num_classes:
                raise DimensionError(f"Level {l} predicts {level.num_classes} classes, expected {num_classes}.")

    @property
    def num_levels(self):
        return len(self.levels)

    @property
    def is_trained(self):
        return all(level.frozen for level in self.levels)

    def expected_input_dim(self, l):
        if l == 0:
            return self.base_feature_dim
        dim = l * self.num_classes
        return dim + self.base_feature_dim if self.include_base_features else dim

    def level_predictions(self, features):
        """Eval-mode probabilities of every level, in level order."""
        x = as_tensor2(features, 'features')
        cached = []
        for l, level in enumerate(self.levels):
            cached.append(level.predict(level_input(self, l, x, cached)))
        return cached


@dataclass(frozen=True)
class ModelConfig:
    """
    Architecture settings of the `model` config section.

    `base_hidden_dim` is the hidden width of level 0; None uses
    `hidden_dim`, 0 makes level 0 a linear readout of the features.
    """
    num_classes: Optional[int] = None
    hidden_dim: int = DEFAULT_HIDDEN_DIM
    base_hidden_dim: Optional[int] = None
    num_levels: int = DEFAULT_NUM_LEVELS
    include_base_features: bool = False
    dropout: float = DEFAULT_DROPOUT

    @classmethod
    def from_config(cls, model):
        """Builds a ModelConfig from the `model` section of a Config,
        raising ConfigError for values of the wrong type or range."""
        dropout = setting_real(model.get('dropout', DEFAULT_DROPOUT), 'model.dropout', 0.0)
        if dropout >= 1.0:
            raise ConfigError(f"'model.dropout' must be below 1, got {dropout}.")
        return cls(
            num_classes=setting_int(model.get('num_classes'), 'model.num_classes', 1, optional=True),
            hidden_dim=setting_int(model.get('hidden_dim', DEFAULT_HIDDEN_DIM), 'model.hidden_dim', 1),
            base_hidden_dim=setting_int(model.get('base_hidden_dim'), 'model.base_hidden_dim', 0, optional=True),
            num_levels=setting_int(model.get('num_levels', DEFAULT_NUM_LEVELS), 'model.num_levels', 1),
            include_base_features=setting_bool(model.get('include_base_features', False),
                                               'model.include_base_features'),
            dropout=dropout,
        )

    def build(self, num_classes, base_feature_dim, seed=0, loss_family=None):
        if self.num_classes is not None and self.num_classes != num_classes:
            raise ConfigError(f"model.num_classes is {self.num_classes} but the data has {num_classes} classes.")
        return build_cascade(num_classes, base_feature_dim, self.num_levels, self.hidden_dim,
                             self.include_base_features, seed, self.dropout, loss_family, self.base_hidden_dim)


def _level_network(in_dim, hidden_dim, num_classes, dropout, seed, l):
    head_rng = make_rng(seed, STREAM_INIT, l, 1)
    if hidden_dim == 0:
        return MlpNetwork([he_init(LinearLayer(in_dim, 2 * num_classes), head_rng)], dropout)
    hidden = he_init(LinearLayer(in_dim, hidden_dim), make_rng(seed, STREAM_INIT, l, 0))
    head = he_init(LinearLayer(hidden_dim, 2 * num_classes), head_rng)
    return MlpNetwork([hidden, head], dropout)


def build_cascade(num_classes, base_feature_dim, num_levels=DEFAULT_NUM_LEVELS, hidden_dim=DEFAULT_HIDDEN_DIM,
                  include_base_features=False, seed=0, dropout=DEFAULT_DROPOUT, loss_family=None,
                  base_hidden_dim=None):
    """
    Builds an untrained, He-initialized cascade.

    Parameters
    ----------
    num_classes : int
        C; at least 2 for the PWE family.
    base_feature_dim : int
        D, the raw feature width read by level 0.
    num_levels : int
        Total number of trained stages including level 0.
    hidden_dim : int
        Width of each level's hidden layer.
    include_base_features : bool
        Prepend the raw features to the inputs of levels >= 1.
    seed : int
        Initialization seed; level l layer k draws from its own stream.
    dropout : float
        Dropout rate between the two layers of a level.
    loss_family : str, optional
        Used to reject class counts the loss cannot handle.
    base_hidden_dim : int, optional
        Hidden width of level 0, `hidden_dim` when None. With 0, level 0 is
        a single linear layer from the features to the 2C logits.
    """
    if num_levels < 1:
        raise ConfigError(f"num_levels must be at least 1, got {num_levels}.")
    if num_classes < 1:
        raise DimensionError(f"num_classes must be at least 1, got {num_classes}.")
    if loss_family == 'PWE' and num_classes < 2:
        raise ConfigError("The PWE loss needs at least 2 classes; with one class it has no pairs.")
    if base_feature_dim < 1 or hidden_dim < 1:
        raise DimensionError(f"Feature and hidden widths must be positive, got {base_feature_dim} and {hidden_dim}.")
    if base_hidden_dim is not None and base_hidden_dim < 0:
        raise DimensionError(f"Level 0 hidden width must be non-negative, got {base_hidden_dim}.")
    levels = []
    for l in range(num_levels):
        in_dim = base_feature_dim if l == 0 else l * num_classes + (base_feature_dim if include_base_features else 0)
        width = hidden_dim if l > 0 or base_hidden_dim is None else base_hidden_dim
        levels.append(CascadeLevel(l, _level_network(in_dim, width, num_classes, dropout, seed, l)))
    model = CascadeModel(levels, num_classes, base_feature_dim, include_base_features, hidden_dim, dropout, seed,
                         base_hidden_dim)
    logger.debug(f"Built cascade of {num_levels} levels, C={num_classes}, D={base_feature_dim}, hidden={hidden_dim}")
    return model


def level_input(model, l, features, cached_predictions):
    """
    Input matrix of level l: the class probabilities of levels 0..l-1
    concatenated in level order, preceded by the raw features when the
    model passes them through. Level 0 reads the raw features.
    """
    x = as_tensor2(features, 'features')
    if l == 0:
        return x
    if len(cached_predictions) < l or any(q is None for q in cached_predictions[:l]):
        raise StateError(f"Level {l} needs cached predictions of levels 0..{l - 1}.")
    parts = [np.asarray(q, dtype=np.float64) for q in cached_predictions[:l]]
    for k, q in enumerate(parts):
        if q.shape != (x.shape[0], model.num_classes):
            raise DimensionError(f"Cached predictions of level {k} have shape {q.shape}.")
    if model.include_base_features:
        parts.insert(0, x)
    return np.hstack(parts)


def predict(model, features, return_levels=False):
    """
    Ensemble prediction: the mean over all levels of their per-class
    probabilities, in eval mode.

    Returns
    -------
    numpy.ndarray or (numpy.ndarray, list of numpy.ndarray)
        The (N, C) prediction matrix, and the per-level predictions when
        `return_levels` is set.
    """
    if not model.is_trained:
        raise StateError("Model is not trained; predict needs every level frozen.")
    levels = model.level_predictions(features)
    mean = np.mean(np.stack(levels), axis=0)
    return (mean, levels) if return_levels else mean


def experiment_name(loss_family, num_levels):
    base = 'BR' if loss_family == 'BR-CE' else loss_family
    return f"C-{base}" if num_levels > 1 else base
