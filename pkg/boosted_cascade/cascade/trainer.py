import logging
import math
import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..diffkernel.optim import SgdConfig, learning_rate, sgd_step
from ..diffkernel.rng import STREAM_DROPOUT, STREAM_SAMPLE, STREAM_SHUFFLE, make_rng
from ..config import setting_int, setting_real
from ..errors import ConfigError, DimensionError, DivergenceError, StateError
from ..losses import LossCurve, resolve_loss_cls
from ..sampling import DEFAULT_DECAY_RATE, RebalanceSpec, draw_boost_sample, rank_by_difficulty, rebalance_sample
from .model import level_input

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyper-parameters of a cascade training run.

    `decay_rates` holds R for the sample of level 1, 2, ...; a shorter tuple
    repeats its last value. `sample_size` defaults to the training set size.
    """
    loss_family: str = 'BR-CE'
    sgd: SgdConfig = field(default_factory=SgdConfig)
    epochs: int = 10
    batch_size: int = 64
    decay_rates: Tuple[float, ...] = (DEFAULT_DECAY_RATE,)
    sample_size: Optional[int] = None
    rebalance: RebalanceSpec = field(default_factory=RebalanceSpec)
    seed: int = 0
    log_interval: int = 100

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}.")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}.")
        if self.sample_size is not None and self.sample_size < 1:
            raise ConfigError(f"sample_size must be at least 1, got {self.sample_size}.")
        if not self.decay_rates or any(not r >= 0 for r in self.decay_rates):
            raise ConfigError(f"decay_rate must be non-negative, got {list(self.decay_rates)}.")
        if self.log_interval < 1:
            raise ConfigError(f"log_interval must be at least 1, got {self.log_interval}.")

    @classmethod
    def from_config(cls, train):
        """Builds a TrainConfig from the `train` section of a Config."""
        rates = train.get('decay_rate', DEFAULT_DECAY_RATE)
        rates = rates if isinstance(rates, (list, tuple)) else [rates]
        rates = tuple(setting_real(r, 'train.decay_rate', 0.0) for r in rates)
        rebalance = train.get('rebalance') or {}
        try:
            return cls(
                loss_family=train.get('loss_family', 'BR-CE'),
                sgd=SgdConfig(
                    learning_rate=float(train.get('learning_rate', 0.1)),
                    momentum=float(train.get('momentum', 0.9)),
                    decay_points=tuple(train.get('decay_points', ('1/3', '2/3'))),
                    decay_factor=float(train.get('decay_factor', 0.1)),
                ),
                epochs=setting_int(train.get('epochs', 10), 'train.epochs', 1),
                batch_size=setting_int(train.get('batch_size', 64), 'train.batch_size', 1),
                decay_rates=rates,
                sample_size=setting_int(train.get('sample_size'), 'train.sample_size', 1, optional=True),
                rebalance=RebalanceSpec(rebalance.get('strategy', 'median'), rebalance.get('targets')),
                seed=setting_int(train.get('seed', 0), 'train.seed', 0),
                log_interval=setting_int(train.get('log_interval', 100), 'train.log_interval', 1),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Invalid train settings: {e}")

    def decay_rate_for(self, level):
        """R used to draw the sample of `level` (>= 1)."""
        return self.decay_rates[min(max(level, 1) - 1, len(self.decay_rates) - 1)]

    def to_dict(self):
        sgd = self.sgd.to_dict()
        del sgd['total_steps']
        return {
            'loss_family': self.loss_family,
            **sgd,
            'epochs': self.epochs,
            'batch_size': self.batch_size,
            'decay_rate': list(self.decay_rates),
            'sample_size': self.sample_size,
            'rebalance': self.rebalance.to_dict(),
            'seed': self.seed,
            'log_interval': self.log_interval,
        }


@dataclass
class LevelLog:
    level: int
    curve: LossCurve
    sample_ids: np.ndarray
    total_steps: int
    train_loss: float = math.nan
    ranking: Optional[object] = None


@dataclass
class TrainingLog:
    """Loss curves, samples and difficulty rankings of every level."""
    levels: List[LevelLog] = field(default_factory=list)

    def write(self, log_dir):
        """Writes level_<l>.csv loss curves and ranking_<l>.csv rankings;
        returns the written paths."""
        os.makedirs(log_dir, exist_ok=True)
        paths = []
        for entry in self.levels:
            paths.append(entry.curve.write(os.path.join(log_dir, f"level_{entry.level}.csv")))
            if entry.ranking is not None:
                paths.append(entry.ranking.to_csv(os.path.join(log_dir, f"ranking_{entry.level}.csv")))
        return paths


def _diverged(level, step, epoch, lr, what):
    logger.error(f"Level {level} diverged at step {step} (epoch {epoch}), lr={lr}: {what}")
    raise DivergenceError(f"Training diverged at level {level}, step {step}: {what}.", level=level, step=step)


def _train_level(level, inputs, labels, sample_ids, loss, config, class_names):
    network = level.network
    n_sample = sample_ids.size
    total_steps = config.epochs * math.ceil(n_sample / config.batch_size)
    sgd = config.sgd.with_total_steps(total_steps)
    curve = LossCurve(class_names)
    step = 0
    for epoch in range(config.epochs):
        order = make_rng(config.seed, STREAM_SHUFFLE, level.index, epoch).permutation(sample_ids)
        for start in range(0, n_sample, config.batch_size):
            batch = order[start:start + config.batch_size]
            network.zero_grad()
            logits, cache = network.forward(inputs[batch], train_mode=True,
                                            rng=make_rng(config.seed, STREAM_DROPOUT, level.index, step))
            if not np.all(np.isfinite(logits)):
                _diverged(level.index, step, epoch, learning_rate(sgd, step), "non-finite logits")
            breakdown = loss.evaluate(logits, labels[batch])
            if not np.isfinite(breakdown.total):
                _diverged(level.index, step, epoch, learning_rate(sgd, step), f"loss {breakdown.total}")
            network.backward(cache, breakdown.grad_logits)
            lr = learning_rate(sgd, step)
            sgd_step(network.layers, sgd, step)
            curve.record(step, lr, breakdown)
            if step % config.log_interval == 0:
                logger.info(f"level {level.index} step {step}/{total_steps} lr={lr:g} loss={breakdown.total:.6f}")
            step += 1
    return curve, total_steps


def train_cascade(model, dataset, config, loss=None):
    """
    Trains every level of `model` in order, then freezes it.

    Level 0 learns from a rebalanced sample of the training set. After a
    level is frozen its eval-mode predictions on the whole training set are
    cached as input of the next levels, the examples are ranked by their
    loss under that level, and the next level's sample is drawn from the
    ranking with replacement, favouring the hardest examples.

    Parameters
    ----------
    model : CascadeModel
        Untrained cascade; trained in place.
    dataset : Dataset
        Training split.
    config : TrainConfig
    loss : loss object, optional
        Defaults to the `config.loss_family` loss, weighted on `dataset`.

    Returns
    -------
    (CascadeModel, TrainingLog)
    """
    if any(level.frozen for level in model.levels):
        raise StateError("Model already holds trained levels; build a fresh one to retrain.")
    if dataset.num_classes != model.num_classes:
        raise DimensionError(f"Dataset has {dataset.num_classes} classes, model predicts {model.num_classes}.")
    if dataset.num_features != model.base_feature_dim:
        raise DimensionError(f"Dataset has {dataset.num_features} features, model reads {model.base_feature_dim}.")
    if loss is None:
        loss = resolve_loss_cls(config.loss_family).for_training_labels(dataset.labels, dataset.class_names)
    if model.num_classes < loss.min_classes:
        raise ConfigError(f"{loss.name} needs at least {loss.min_classes} classes, got {model.num_classes}.")

    features = dataset.features
    labels = dataset.labels.astype(np.float64)
    class_names = list(dataset.class_names) if hasattr(loss, 'class_weights') else None
    sample_size = config.sample_size or dataset.num_examples
    log = TrainingLog()
    cached = []
    sample_ids = rebalance_sample(labels, config.rebalance, make_rng(config.seed, STREAM_SAMPLE, 0))
    for l, level in enumerate(model.levels):
        logger.info(f"Training level {l + 1}/{model.num_levels} on {sample_ids.size} draws "
                    f"({np.unique(sample_ids).size} distinct examples)")
        inputs = level_input(model, l, features, cached)
        curve, total_steps = _train_level(level, inputs, labels, sample_ids, loss, config, class_names)
        level.freeze()

        logits = level.logits(inputs)
        cached.append(level.predict(inputs))
        breakdown = loss.evaluate(logits, labels)
        ranking = rank_by_difficulty(breakdown.per_example, config.decay_rate_for(l + 1))
        log.levels.append(LevelLog(l, curve, sample_ids, total_steps, breakdown.total, ranking))
        logger.info(f"Level {l} frozen, training-set loss {breakdown.total:.6f}")
        if l + 1 < model.num_levels:
            sample_ids = draw_boost_sample(ranking, sample_size, make_rng(config.seed, STREAM_SAMPLE, l + 1))
    return model, log
