import csv
import io
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import DimensionError
from ..utils import atomic_write_text, dumps_json
from .roc import roc_auc

logger = logging.getLogger(__name__)

UNDEFINED = 'undefined'


def _macro(aucs):
    defined = [a for a in aucs if a is not None]
    return float(np.mean(defined)) if defined else None


def _fmt(auc, digits=4):
    return UNDEFINED if auc is None else f"{auc:.{digits}f}"


def _exact(auc):
    return UNDEFINED if auc is None else repr(auc)


def _csv_text(class_names, columns, positives, negatives):
    """One row per class with one AUC column per (title, aucs) pair, then
    the macro-average row."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(['class', *[title for title, _ in columns], 'positives', 'negatives'])
    for c, name in enumerate(class_names):
        writer.writerow([name, *[_exact(aucs[c]) for _, aucs in columns], positives[c], negatives[c]])
    writer.writerow(['macro_average', *[_exact(_macro(aucs)) for _, aucs in columns], '', ''])
    return out.getvalue()


def _table_text(class_names, columns):
    titles = [title for title, _ in columns]
    rows = [(name, [_fmt(aucs[c]) for _, aucs in columns]) for c, name in enumerate(class_names)]
    macro = ('Macro average', [_fmt(_macro(aucs)) for _, aucs in columns])
    left = max(len(label) for label, _ in rows + [macro, ('Class', None)])
    widths = [max(len(titles[k]), *(len(values[k]) for _, values in rows + [macro])) for k in range(len(titles))]

    def line(label, values):
        return ' | '.join([label.ljust(left), *[v.rjust(w) for v, w in zip(values, widths)]])

    header = line('Class', titles)
    rule = '-' * len(header)
    lines = [header, rule, *[line(label, values) for label, values in rows], rule, line(*macro)]
    undefined = [name for c, name in enumerate(class_names) if any(aucs[c] is None for _, aucs in columns)]
    if undefined:
        lines.append(f"(undefined, excluded from average: {', '.join(undefined)})")
    return '\n'.join(lines) + '\n'


@dataclass(frozen=True)
class EvalReport:
    """
    Per-class ROC AUCs of one model on one labelled set.

    Classes whose labels are all positive or all negative have an AUC of
    None; they are reported as undefined and left out of the macro average.
    `level_rows` optionally holds the same AUCs for every cascade level and
    the ensemble, as (row label, per-class AUCs) pairs.
    """
    class_names: Tuple[str, ...]
    aucs: Tuple[Optional[float], ...]
    positives: Tuple[int, ...]
    negatives: Tuple[int, ...]
    experiment: str = 'AUC'
    level_rows: Tuple = ()

    @property
    def macro_auc(self):
        return _macro(self.aucs)

    @property
    def undefined_classes(self):
        return [n for n, a in zip(self.class_names, self.aucs) if a is None]

    def auc(self, class_name):
        return self.aucs[self.class_names.index(class_name)]

    def to_csv_text(self):
        return _csv_text(self.class_names, [(self.experiment, self.aucs)], self.positives, self.negatives)

    def render_table(self):
        """Aligned text table: one row per class, in the given class order."""
        return _table_text(self.class_names, [(self.experiment, self.aucs)])

    def levels_csv_text(self):
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(['level', *self.class_names, 'macro_average'])
        for label, aucs in self.level_rows:
            writer.writerow([label, *[_exact(a) for a in aucs], _exact(_macro(aucs))])
        return out.getvalue()

    def to_dict(self):
        return {
            'experiment': self.experiment,
            'classes': [
                {'name': n, 'auc': a, 'positives': p, 'negatives': q}
                for n, a, p, q in zip(self.class_names, self.aucs, self.positives, self.negatives)
            ],
            'macro_average': self.macro_auc,
            'undefined': self.undefined_classes,
            'levels': [{'level': label, 'aucs': list(aucs), 'macro_average': _macro(aucs)}
                       for label, aucs in self.level_rows],
        }

    def write(self, out_dir, formats=('csv', 'txt', 'json')):
        """Writes report.<fmt> files (and levels.csv when per-level rows
        exist) into `out_dir`; returns the written paths."""
        written = []
        if 'csv' in formats:
            written.append(atomic_write_text(f"{out_dir}/report.csv", self.to_csv_text()))
        if 'txt' in formats:
            written.append(atomic_write_text(f"{out_dir}/report.txt", self.render_table()))
        if 'json' in formats:
            written.append(atomic_write_text(f"{out_dir}/report.json", dumps_json(self.to_dict())))
        if self.level_rows:
            written.append(atomic_write_text(f"{out_dir}/levels.csv", self.levels_csv_text()))
        return written


@dataclass(frozen=True)
class ComparisonReport:
    """
    Per-class AUCs of several models on the same labelled set, one column
    per model in the given order (e.g. BR, PWE, C-BR, C-PWE).
    """
    class_names: Tuple[str, ...]
    columns: Tuple[Tuple[str, Tuple[Optional[float], ...]], ...]
    positives: Tuple[int, ...]
    negatives: Tuple[int, ...]

    @property
    def experiments(self):
        return [title for title, _ in self.columns]

    def auc(self, experiment, class_name):
        return dict(self.columns)[experiment][self.class_names.index(class_name)]

    def macro_auc(self, experiment):
        return _macro(dict(self.columns)[experiment])

    def to_csv_text(self):
        return _csv_text(self.class_names, self.columns, self.positives, self.negatives)

    def render_table(self):
        return _table_text(self.class_names, self.columns)

    def to_dict(self):
        return {
            'experiments': self.experiments,
            'classes': [
                {'name': n, 'aucs': {title: aucs[c] for title, aucs in self.columns}, 'positives': p, 'negatives': q}
                for c, (n, p, q) in enumerate(zip(self.class_names, self.positives, self.negatives))
            ],
            'macro_average': {title: _macro(aucs) for title, aucs in self.columns},
            'undefined': {title: [n for n, a in zip(self.class_names, aucs) if a is None]
                          for title, aucs in self.columns},
        }

    def write(self, out_dir, formats=('csv', 'txt', 'json')):
        written = []
        if 'csv' in formats:
            written.append(atomic_write_text(f"{out_dir}/report.csv", self.to_csv_text()))
        if 'txt' in formats:
            written.append(atomic_write_text(f"{out_dir}/report.txt", self.render_table()))
        if 'json' in formats:
            written.append(atomic_write_text(f"{out_dir}/report.json", dumps_json(self.to_dict())))
        return written


def compare_reports(reports):
    """
    Lays the reports of several models side by side.

    All reports must cover the same classes and the same labels. Columns
    are titled by experiment; a repeated title gets a `#2`, `#3`, ...
    suffix.
    """
    if not reports:
        raise DimensionError("Nothing to compare: no reports given.")
    first = reports[0]
    for report in reports[1:]:
        if report.class_names != first.class_names:
            raise DimensionError(f"Reports cover different classes: {list(first.class_names)} "
                                 f"and {list(report.class_names)}.")
        if (report.positives, report.negatives) != (first.positives, first.negatives):
            raise DimensionError("Reports were computed on different label sets.")
    seen = {}
    columns = []
    for report in reports:
        seen[report.experiment] = seen.get(report.experiment, 0) + 1
        count = seen[report.experiment]
        title = report.experiment if count == 1 else f"{report.experiment}#{count}"
        columns.append((title, report.aucs))
    return ComparisonReport(first.class_names, tuple(columns), first.positives, first.negatives)


def class_aucs(predictions, labels):
    q = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(labels)
    if q.shape != y.shape or q.ndim != 2:
        raise DimensionError(f"Predictions {q.shape} and labels {y.shape} must be equal 2-D shapes.")
    return tuple(roc_auc(q[:, c], y[:, c]) for c in range(q.shape[1]))


def build_report(predictions, labels, class_names, level_predictions=None, experiment='AUC'):
    """
    Computes the per-class AUC table.

    Parameters
    ----------
    predictions : array-like, shape (N, C)
    labels : array-like, shape (N, C)
    class_names : sequence of str, length C
    level_predictions : list of array-like, optional
        Per-level predictions; adds one breakdown row per level plus the
        ensemble row.
    experiment : str
        Column title, e.g. "C-BR".
    """
    y = np.asarray(labels)
    if len(class_names) != y.shape[1]:
        raise DimensionError(f"Got {len(class_names)} class names for {y.shape[1]} label columns.")
    aucs = class_aucs(predictions, y)
    level_rows = ()
    if level_predictions is not None:
        level_rows = tuple((f"level_{l}", class_aucs(q, y)) for l, q in enumerate(level_predictions))
        level_rows += (('ensemble', aucs),)
    report = EvalReport(
        class_names=tuple(class_names),
        aucs=aucs,
        positives=tuple(int(v) for v in (y == 1).sum(axis=0)),
        negatives=tuple(int(v) for v in (y == 0).sum(axis=0)),
        experiment=experiment,
        level_rows=level_rows,
    )
    for name in report.undefined_classes:
        logger.warning(f"AUC undefined for class '{name}': only one label value in the evaluation set.")
    return report
