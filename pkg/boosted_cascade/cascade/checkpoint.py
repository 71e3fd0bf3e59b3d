import json
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from ..diffkernel.snapshot import network_from_dict, network_to_dict
from ..errors import CascadeError, ParseError
from ..losses import resolve_loss_cls
from ..utils import atomic_write_text, dumps_json
from .model import CascadeLevel, CascadeModel, experiment_name

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 'boosted-cascade-checkpoint'
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class Checkpoint:
    model: CascadeModel
    class_names: Tuple[str, ...]
    train_config: dict
    loss: Optional[object]
    experiment: str


def checkpoint_to_dict(model, class_names, train_config=None, loss=None):
    loss_family = (train_config or {}).get('loss_family', loss.name if loss is not None else 'BR-CE')
    return {
        'format': CHECKPOINT_FORMAT,
        'version': CHECKPOINT_VERSION,
        'experiment_name': experiment_name(loss_family, model.num_levels),
        'class_names': list(class_names),
        'model': {
            'num_classes': model.num_classes,
            'base_feature_dim': model.base_feature_dim,
            'include_base_features': model.include_base_features,
            'hidden_dim': model.hidden_dim,
            'base_hidden_dim': model.base_hidden_dim,
            'dropout': model.dropout,
            'seed': model.seed,
            'levels': [
                {'index': level.index, 'frozen': level.frozen, 'network': network_to_dict(level.network)}
                for level in model.levels
            ],
        },
        'train_config': train_config or {},
        'loss': loss.to_dict() if loss is not None else None,
    }


def save_checkpoint(path, model, class_names, train_config=None, loss=None):
    """
    Writes the model parameters with the settings that produced them as JSON.
    Equal models and settings give byte-identical files.

    Parameters
    ----------
    path : str
    model : CascadeModel
    class_names : sequence of str
    train_config : dict, optional
        `TrainConfig.to_dict()` of the run.
    loss : loss object, optional
        Stored so evaluation can reuse the training class weights.
    """
    if len(class_names) != model.num_classes:
        raise ParseError(f"{len(class_names)} class names for a {model.num_classes}-class model.")
    atomic_write_text(path, dumps_json(checkpoint_to_dict(model, class_names, train_config, loss)))
    logger.info(f"Saved {model.num_levels}-level checkpoint to '{path}'")
    return path


def checkpoint_from_dict(data):
    if not isinstance(data, dict) or data.get('format') != CHECKPOINT_FORMAT:
        raise ParseError("Not a boosted cascade checkpoint.")
    if data.get('version') != CHECKPOINT_VERSION:
        raise ParseError(f"Unsupported checkpoint version {data.get('version')!r}.")
    try:
        spec = data['model']
        levels = [
            CascadeLevel(int(entry['index']), network_from_dict(entry['network']), bool(entry['frozen']))
            for entry in spec['levels']
        ]
        model = CascadeModel(
            levels,
            num_classes=int(spec['num_classes']),
            base_feature_dim=int(spec['base_feature_dim']),
            include_base_features=bool(spec['include_base_features']),
            hidden_dim=int(spec['hidden_dim']),
            dropout=float(spec['dropout']),
            seed=int(spec.get('seed', 0)),
            base_hidden_dim=None if spec.get('base_hidden_dim') is None else int(spec['base_hidden_dim']),
        )
        loss = None
        if data.get('loss'):
            loss = resolve_loss_cls(data['loss']['family']).from_dict(data['loss'])
        class_names = tuple(data['class_names'])
    except (KeyError, TypeError) as e:
        raise ParseError(f"Malformed checkpoint: missing or invalid {e}.")
    except CascadeError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(f"Inconsistent checkpoint: {e}")
    if len(class_names) != model.num_classes:
        raise ParseError(f"{len(class_names)} class names for a {model.num_classes}-class model.")
    return Checkpoint(model, class_names, data.get('train_config') or {}, loss, data.get('experiment_name', ''))


def load_checkpoint(path):
    with open(path) as f:
        try:
            data = json.load(f)
        except ValueError as e:
            raise ParseError(f"Checkpoint '{path}' is not valid JSON: {e}", line=getattr(e, 'lineno', None))
    checkpoint = checkpoint_from_dict(data)
    logger.info(f"Loaded {checkpoint.model.num_levels}-level checkpoint from '{path}'")
    return checkpoint
