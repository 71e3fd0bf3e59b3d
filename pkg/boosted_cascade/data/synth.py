import json
import logging
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Optional, Tuple

import numpy as np

from ..diffkernel.rng import STREAM_DATA, make_rng
from ..errors import SpecError
from .dataset import Dataset, split_indices

logger = logging.getLogger(__name__)

OPERATORS = {
    'xor': lambda cols: np.bitwise_xor.reduce(cols, axis=0),
    'and': lambda cols: np.bitwise_and.reduce(cols, axis=0),
    'or': lambda cols: np.bitwise_or.reduce(cols, axis=0),
    'not': lambda cols: 1 - cols[0],
}


@dataclass(frozen=True)
class DependencyRule:
    """Class `target` is `op` over the `inputs` classes, then each label is
    flipped with probability `flip_rate`."""
    target: int
    op: str
    inputs: Tuple[int, ...]
    flip_rate: float = 0.0

    @classmethod
    def from_dict(cls, d):
        return cls(int(d['target']), str(d['op']).lower(), tuple(int(i) for i in d['inputs']),
                   float(d.get('flip_rate', 0.0)))

    def to_dict(self):
        return {'target': self.target, 'op': self.op, 'inputs': list(self.inputs), 'flip_rate': self.flip_rate}


@dataclass(frozen=True)
class SynthSpec:
    """
    Recipe for a synthetic multi-label dataset.

    Non-target classes are drawn independently from their `priors`. Each
    class c shifts the features by `signal[c]` along a random unit
    direction when positive; rule targets get no feature signal, so they
    are learnable only through the labels they depend on.
    """
    n: int
    d: int
    c: int
    priors: Tuple[float, ...]
    signal: Tuple[float, ...]
    rules: Tuple[DependencyRule, ...] = ()
    seed: int = 0
    class_names: Optional[Tuple[str, ...]] = None
    test_fraction: float = 0.2
    group_size: int = 1
    grouped_split: bool = False
    rule_order: Tuple[int, ...] = field(default=(), init=False, compare=False)

    def __post_init__(self):
        if self.n < 2 or self.d < 1 or self.c < 1:
            raise SpecError(f"Need n >= 2, d >= 1, c >= 1; got n={self.n}, d={self.d}, c={self.c}.")
        if len(self.priors) != self.c or any(not 0.0 < p < 1.0 for p in self.priors):
            raise SpecError(f"priors must hold {self.c} values in (0, 1).")
        if len(self.signal) != self.c or any(s < 0 for s in self.signal):
            raise SpecError(f"signal must hold {self.c} non-negative values.")
        if self.class_names is not None and len(self.class_names) != self.c:
            raise SpecError(f"class_names must hold {self.c} names.")
        if self.group_size < 1:
            raise SpecError(f"group_size must be at least 1, got {self.group_size}.")
        if not 0.0 < self.test_fraction < 1.0:
            raise SpecError(f"test_fraction must be in (0, 1), got {self.test_fraction}.")
        if self.seed < 0:
            raise SpecError(f"seed must be non-negative, got {self.seed}.")
        graph = {}
        for rule in self.rules:
            if rule.op not in OPERATORS:
                raise SpecError(f"Unknown rule operator '{rule.op}', expected one of {sorted(OPERATORS)}.")
            if not 0 <= rule.target < self.c or any(not 0 <= i < self.c for i in rule.inputs):
                raise SpecError(f"Rule for class {rule.target} references a class outside 0..{self.c - 1}.")
            if rule.target in rule.inputs:
                raise SpecError(f"Rule for class {rule.target} uses its own target as input.")
            if not rule.inputs or (rule.op == 'not' and len(rule.inputs) != 1):
                raise SpecError(f"Rule for class {rule.target} has a wrong number of inputs for '{rule.op}'.")
            if not 0.0 <= rule.flip_rate <= 1.0:
                raise SpecError(f"Rule for class {rule.target} has flip_rate outside [0, 1].")
            if rule.target in graph:
                raise SpecError(f"Class {rule.target} is the target of more than one rule.")
            graph[rule.target] = set(rule.inputs)
        try:
            order = [t for t in TopologicalSorter(graph).static_order() if t in graph]
        except CycleError as e:
            raise SpecError(f"Dependency rules form a cycle: {e.args[1]}")
        object.__setattr__(self, 'rule_order', tuple(order))

    @property
    def names(self):
        return tuple(self.class_names) if self.class_names else tuple(f"class_{i}" for i in range(self.c))

    def rule_for(self, target):
        return next(r for r in self.rules if r.target == target)

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                n=int(d['n']), d=int(d['d']), c=int(d['c']),
                priors=tuple(float(p) for p in d['priors']),
                signal=tuple(float(s) for s in d['signal']),
                rules=tuple(DependencyRule.from_dict(r) for r in d.get('rules', [])),
                seed=int(d.get('seed', 0)),
                class_names=tuple(d['class_names']) if d.get('class_names') else None,
                test_fraction=float(d.get('test_fraction', 0.2)),
                group_size=int(d.get('group_size', 1)),
                grouped_split=bool(d.get('grouped_split', False)),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, SpecError):
                raise
            raise SpecError(f"Invalid synthetic dataset spec: {e!r}")

    def to_dict(self):
        return {
            'n': self.n, 'd': self.d, 'c': self.c,
            'priors': list(self.priors), 'signal': list(self.signal),
            'rules': [r.to_dict() for r in self.rules],
            'seed': self.seed,
            'class_names': list(self.names),
            'test_fraction': self.test_fraction,
            'group_size': self.group_size,
            'grouped_split': self.grouped_split,
        }


def load_synth_spec(path):
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise SpecError(f"Spec file '{path}' is not valid JSON: {e}")
    return SynthSpec.from_dict(data)


def generate_labels(spec, rng):
    y = np.zeros((spec.n, spec.c), dtype=np.int64)
    for c in range(spec.c):
        if c not in spec.rule_order:
            y[:, c] = rng.random(spec.n) < spec.priors[c]
    for target in spec.rule_order:
        rule = spec.rule_for(target)
        value = OPERATORS[rule.op](y[:, list(rule.inputs)].T)
        flips = rng.random(spec.n) < rule.flip_rate
        y[:, target] = np.where(flips, 1 - value, value)
    return y


def generate(spec):
    """
    Draws a dataset from `spec` and splits it into train and test parts.

    Returns
    -------
    (Dataset, Dataset)
        Train and test splits; identical for identical specs.
    """
    rng = make_rng(spec.seed, STREAM_DATA)
    y = generate_labels(spec, rng)
    directions = rng.normal(size=(spec.c, spec.d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    signal = np.array(spec.signal, dtype=np.float64)
    signal[list(spec.rule_order)] = 0.0
    x = rng.normal(size=(spec.n, spec.d)) + (y * signal) @ directions

    groups = np.arange(spec.n) // spec.group_size if spec.grouped_split else None
    train_idx, test_idx = split_indices(spec.n, spec.test_fraction, make_rng(spec.seed, STREAM_DATA, 1), groups)
    names = spec.names
    train = Dataset(x[train_idx], y[train_idx], names, 'train')
    test = Dataset(x[test_idx], y[test_idx], names, 'test')
    logger.info(f"Generated {spec.n} examples ({train.num_examples} train, {test.num_examples} test), "
                f"{spec.c} classes, {len(spec.rules)} dependency rules")
    return train, test
