from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..diffkernel.layers import as_tensor2
from ..errors import DataError, DimensionError, LabelError

SPLITS = ('train', 'test')


@dataclass(frozen=True)
class Dataset:
    """Dense features (N x D) with a multi-hot label matrix (N x C).
    Arrays are made read-only on construction."""
    features: np.ndarray
    labels: np.ndarray
    class_names: Tuple[str, ...]
    split: str = 'train'

    def __post_init__(self):
        features = as_tensor2(self.features, 'features').copy()
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise DimensionError(f"Labels must be 2-D, got shape {labels.shape}.")
        if labels.shape[0] != features.shape[0]:
            raise DimensionError(f"{features.shape[0]} feature rows but {labels.shape[0]} label rows.")
        if not np.all((labels == 0) | (labels == 1)):
            raise LabelError("Labels must be 0 or 1.")
        if len(self.class_names) != labels.shape[1]:
            raise DimensionError(f"{len(self.class_names)} class names for {labels.shape[1]} label columns.")
        if self.split not in SPLITS:
            raise DataError(f"Unknown split '{self.split}', expected one of {SPLITS}.")
        labels = labels.astype(np.int64)
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'class_names', tuple(str(n) for n in self.class_names))

    @property
    def num_examples(self):
        return self.features.shape[0]

    @property
    def num_features(self):
        return self.features.shape[1]

    @property
    def num_classes(self):
        return self.labels.shape[1]

    def subset(self, indices, split=None):
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.class_names, split or self.split)


def split_indices(n, test_fraction, rng, groups=None):
    """
    Random train/test split of n examples; returns sorted (train, test)
    index arrays that are disjoint and together cover 0..n-1.

    With `groups`, whole groups are assigned to one side, taking shuffled
    groups into the test side until it holds at least
    round(n * test_fraction) examples.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}.")
    n_test = int(round(n * test_fraction))
    if groups is None:
        perm = rng.permutation(n)
        test = perm[:n_test]
    else:
        groups = np.asarray(groups)
        unique = rng.permutation(np.unique(groups))
        sizes = np.array([np.count_nonzero(groups == g) for g in unique])
        take = int(np.searchsorted(np.cumsum(sizes), n_test)) + 1
        test = np.flatnonzero(np.isin(groups, unique[:take]))
    mask = np.zeros(n, dtype=bool)
    mask[test] = True
    return np.flatnonzero(~mask), np.flatnonzero(mask)
