import csv
import io
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..losses.base import check_labels


@dataclass(frozen=True)
class CoOccurrence:
    """Joint positive counts: joint[a, b] examples are positive for both a
    and b; the diagonal holds the per-class totals."""
    joint: np.ndarray
    totals: np.ndarray

    def pair(self, a, b):
        return int(self.joint[a, b])


@dataclass(frozen=True)
class ClassStats:
    positives: np.ndarray
    negatives: np.ndarray
    cooccurrence: CoOccurrence

    def to_csv_text(self, class_names):
        """Per-class counts followed by the co-occurrence matrix."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(['class', 'positives', 'negatives'])
        for name, p, n in zip(class_names, self.positives, self.negatives):
            writer.writerow([name, int(p), int(n)])
        writer.writerow([])
        writer.writerow(['cooccurrence', *class_names])
        for name, row in zip(class_names, self.cooccurrence.joint):
            writer.writerow([name, *[int(v) for v in row]])
        return out.getvalue()


def class_stats(labels):
    """Exact positive/negative counts and co-occurrence of a label matrix."""
    y = check_labels(labels).astype(np.int64)
    if y.shape[0] == 0:
        raise DataError("Cannot compute class statistics of an empty label matrix.")
    positives = y.sum(axis=0)
    joint = y.T @ y
    return ClassStats(positives, y.shape[0] - positives, CoOccurrence(joint, positives.copy()))
