from importlib import import_module

from ..errors import ConfigError
from .base import LossBreakdown
from .cross_entropy import ClassWeights, WeightedCrossEntropy, compute_class_weights, weighted_ce
from .curve import LossCurve
from .pairwise import SmoothPairwiseError, smooth_pwe

LOSS_FAMILIES = {
    WeightedCrossEntropy.name: 'boosted_cascade.losses.WeightedCrossEntropy',
    SmoothPairwiseError.name: 'boosted_cascade.losses.SmoothPairwiseError',
}


def resolve_loss_cls(family):
    """Loss class of a family alias (BR-CE, PWE) or a dotted import path."""
    path = LOSS_FAMILIES.get(family, family)
    if '.' not in path:
        raise ConfigError(f"Unknown loss family '{family}', expected one of {sorted(LOSS_FAMILIES)} or a class path.")
    pkg, cls = path.rsplit('.', 1)
    try:
        return getattr(import_module(pkg), cls)
    except (ImportError, AttributeError) as e:
        raise ConfigError(f"Cannot load loss class '{path}': {e}")
