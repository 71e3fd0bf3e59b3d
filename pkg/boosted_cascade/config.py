import copy
import json
import math
import numbers

from .errors import ConfigError
from .losses import resolve_loss_cls
from .utils import decode_value

DEFAULTS = {
    'paths': {
        'train_data': 'data/train.csv',
        'test_data': 'data/test.csv',
        'checkpoint': 'runs/checkpoint.json',
        'logs_dir': 'runs/logs',
        'reports_dir': 'runs/reports',
    },
    'model': {
        'num_classes': None,
        'hidden_dim': 64,
        'base_hidden_dim': None,
        'num_levels': 6,
        'include_base_features': False,
        'dropout': 0.5,
    },
    'train': {
        'loss_family': 'BR-CE',
        'learning_rate': 0.1,
        'momentum': 0.9,
        'decay_points': ['1/3', '2/3'],
        'decay_factor': 0.1,
        'epochs': 10,
        'batch_size': 64,
        'decay_rate': 2.0,
        'sample_size': None,
        'rebalance': {'strategy': 'median', 'targets': None},
        'seed': 0,
        'log_interval': 100,
    },
    'eval': {
        'class_names': None,
        'formats': ['csv', 'txt'],
        'per_level': False,
    },
    'storage': None,
    'log_level': 'INFO',
}

STORAGE_KEYS = ('provider', 'container_name', 'prefix', 'args')


def _merge(defaults, values, where):
    if not isinstance(values, dict):
        raise ConfigError(f"'{where}' must be an object, got {type(values).__name__}.")
    merged = copy.deepcopy(defaults)
    for k, v in values.items():
        if k not in defaults:
            raise ConfigError(f"Unknown setting '{where}.{k}'.")
        if isinstance(defaults[k], dict):
            merged[k] = _merge(defaults[k], v if v is not None else {}, f"{where}.{k}")
        else:
            merged[k] = v
    return merged


def setting_int(value, key, minimum=None, optional=False):
    """An integral setting as int; `None` passes only when `optional`.
    Booleans and fractional numbers are rejected with a ConfigError."""
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, numbers.Real) \
            or not (isinstance(value, numbers.Integral) or float(value).is_integer()):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}.")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"'{key}' must be at least {minimum}, got {value}.")
    return value


def setting_real(value, key, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not math.isfinite(value):
        raise ConfigError(f"'{key}' must be a finite number, got {value!r}.")
    if minimum is not None and value < minimum:
        raise ConfigError(f"'{key}' must be at least {minimum}, got {value}.")
    return float(value)


def setting_bool(value, key):
    if not isinstance(value, bool):
        raise ConfigError(f"'{key}' must be true or false, got {value!r}.")
    return value


def _check_storage(storage):
    if storage is None:
        return None
    if not isinstance(storage, dict):
        raise ConfigError("'storage' must be an object.")
    unknown = set(storage) - set(STORAGE_KEYS)
    if unknown:
        raise ConfigError(f"Unknown setting 'storage.{sorted(unknown)[0]}'.")
    return dict(storage)


class Config:
    """
    Experiment configuration: one JSON document whose sections are merged
    over `DEFAULTS`. Unknown sections and keys are rejected.
    """

    def __init__(self, file=None, data=None):
        if file is not None:
            try:
                with open(file) as f:
                    data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"Config file '{file}' is not valid JSON: {e}")
        self._config = {}
        self._load(data or {})

    def _load(self, data):
        if not isinstance(data, dict):
            raise ConfigError("Config must be a JSON object.")
        for section in data:
            if section not in DEFAULTS:
                raise ConfigError(f"Unknown config section '{section}'.")
        resolved = {}
        for section, default in DEFAULTS.items():
            value = data.get(section)
            if section == 'storage':
                resolved[section] = _check_storage(value)
            elif isinstance(default, dict):
                resolved[section] = _merge(default, value if value is not None else {}, section)
            else:
                resolved[section] = value if value is not None else default
        self._config = resolved

    def paths(self):
        return self._config['paths']

    def model(self):
        return self._config['model']

    def train(self):
        return self._config['train']

    def evaluation(self):
        return self._config['eval']

    def storage(self):
        return self._config['storage']

    def log_level(self):
        return self._config['log_level']

    def loss_cls(self):
        return resolve_loss_cls(self.train().get('loss_family', 'BR-CE'))

    def set(self, key, value):
        """Overrides one leaf by its dotted name, e.g. `set("train.seed", "7")`.
        String values are decoded as JSON when they parse."""
        if isinstance(value, str):
            value = decode_value(value)
        parts = key.split('.')
        if parts[0] == 'storage':
            storage = dict(self._config['storage'] or {})
            if len(parts) == 2:
                storage[parts[1]] = value
            elif len(parts) == 3 and parts[1] == 'args':
                storage['args'] = {**storage.get('args', {}), parts[2]: value}
            else:
                raise ConfigError(f"Unknown setting '{key}'.")
            self._config['storage'] = _check_storage(storage)
            return
        node, defaults = self._config, DEFAULTS
        for part in parts[:-1]:
            if not isinstance(defaults.get(part), dict):
                raise ConfigError(f"Unknown setting '{key}'.")
            node, defaults = node[part], defaults[part]
        if parts[-1] not in defaults:
            raise ConfigError(f"Unknown setting '{key}'.")
        if isinstance(defaults[parts[-1]], dict):
            raise ConfigError(f"'{key}' is a section; set one of its keys.")
        node[parts[-1]] = value

    def update(self, settings):
        for k, v in settings.items():
            self.set(k, v)
        return self

    def as_dict(self):
        return copy.deepcopy(self._config)
