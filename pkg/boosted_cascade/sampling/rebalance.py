import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..diffkernel.rng import make_rng
from ..errors import DataError, ParameterError
from ..losses.base import check_labels

logger = logging.getLogger(__name__)

STRATEGIES = ('median', 'mean', 'max', 'explicit')


@dataclass(frozen=True)
class RebalanceSpec:
    """Target positive count per class: derived from the observed counts by
    `strategy`, or given explicitly as `targets`."""
    strategy: str = 'median'
    targets: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"Unknown rebalance strategy '{self.strategy}', expected one of {STRATEGIES}.")
        if self.strategy == 'explicit':
            if self.targets is None:
                raise ParameterError("Explicit rebalance strategy needs per-class targets.")
            if any(not t > 0 for t in self.targets):
                raise ParameterError("Rebalance targets must be positive.")

    def target_counts(self, class_counts):
        present = class_counts[class_counts > 0]
        if self.strategy == 'explicit':
            targets = np.asarray(self.targets, dtype=np.float64)
            if targets.size != class_counts.size:
                raise ParameterError(f"Got {targets.size} rebalance targets for {class_counts.size} classes.")
            return targets
        if self.strategy == 'median':
            value = np.median(present)
        elif self.strategy == 'mean':
            value = present.mean()
        else:
            value = present.max()
        return np.full(class_counts.size, float(value))

    def to_dict(self):
        d = {'strategy': self.strategy}
        if self.targets is not None:
            d['targets'] = [float(t) for t in self.targets]
        return d


def rebalance_weights(labels, spec):
    """Per-example draw weight: the largest target/count ratio over the
    example's positive classes, 1.0 for examples without positives."""
    y = check_labels(labels)
    counts = y.sum(axis=0)
    if not np.any(counts > 0):
        raise DataError("Cannot rebalance a label matrix without any positive example.")
    targets = spec.target_counts(counts)
    ratios = np.where(counts > 0, targets / np.maximum(counts, 1.0), 0.0)
    weights = (y * ratios).max(axis=1)
    weights[y.sum(axis=1) == 0] = 1.0
    return weights


def rebalance_sample(labels, spec, rng_seed):
    """Draws N example ids with replacement, proportionally to their
    rebalancing weights."""
    weights = rebalance_weights(labels, spec)
    rng = make_rng(rng_seed)
    ids = rng.choice(weights.size, size=weights.size, replace=True, p=weights / weights.sum())
    logger.debug(f"Rebalanced sample of {ids.size} draws, weight range [{weights.min():.3g}, {weights.max():.3g}]")
    return ids
