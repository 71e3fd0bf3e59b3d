"""
Dataset CSV files.

Read and written with the csv module rather than pandas: the reader walks
rows itself so every ParseError carries the 1-based line number, and
features are written with `format_real` (repr) so a float read back is bit-identical to the one written.
"""
import csv
import io
import logging
import re

import numpy as np

from ..errors import DataError, ParseError
from ..utils import atomic_write_text, format_real
from .dataset import Dataset

logger = logging.getLogger(__name__)

FEATURE_COLUMN = re.compile(r'^d_(\d+)$')


def write_csv(dataset, path):
    """Header d_0..d_{D-1} then the class names; one row per example with
    full-precision feature values and 0/1 labels."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow([f"d_{j}" for j in range(dataset.num_features)] + list(dataset.class_names))
    for x, y in zip(dataset.features, dataset.labels):
        writer.writerow([format_real(v) for v in x] + [int(v) for v in y])
    atomic_write_text(path, out.getvalue())
    logger.info(f"Wrote {dataset.num_examples} examples to '{path}'")
    return path


def _parse_header(header, class_names):
    num_features = 0
    while num_features < len(header) and FEATURE_COLUMN.match(header[num_features]):
        if header[num_features] != f"d_{num_features}":
            raise ParseError(f"Feature column '{header[num_features]}' out of order, expected 'd_{num_features}'.", line=1)
        num_features += 1
    names = header[num_features:]
    if num_features == 0:
        raise ParseError("Header has no feature columns (d_0, d_1, ...).", line=1)
    if not names:
        raise ParseError("Header has no label columns.", line=1)
    for name in names:
        if FEATURE_COLUMN.match(name):
            raise ParseError(f"Feature column '{name}' after label columns.", line=1, token=name)
    if class_names is not None:
        unknown = [n for n in names if n not in class_names]
        if unknown:
            raise ParseError(f"Unknown header column '{unknown[0]}'.", line=1, token=unknown[0])
        if list(names) != list(class_names):
            raise ParseError(f"Label columns {names} do not match expected classes {list(class_names)}.", line=1)
    return num_features, names


def read_csv(path, class_names=None, split='train'):
    """
    Reads a dataset written by `write_csv`.

    Raises
    ------
    DataError
        The file holds no header or no examples.
    ParseError
        Ragged rows, unparsable numbers, non-binary label cells, or header
        columns other than d_j features and the expected class names; the
        message carries the line number.
    """
    with open(path, newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header:
            raise DataError(f"Dataset file '{path}' is empty.")
        num_features, names = _parse_header([h.strip() for h in header], class_names)
        width = num_features + len(names)
        features, labels = [], []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != width:
                raise ParseError(f"Expected {width} cells, got {len(row)}.", line=line)
            try:
                features.append([float(v) for v in row[:num_features]])
            except ValueError as e:
                raise ParseError(f"Invalid feature value: {e}", line=line)
            cells = [v.strip() for v in row[num_features:]]
            for name, cell in zip(names, cells):
                if cell not in ('0', '1'):
                    raise ParseError(f"Label '{name}' must be 0 or 1, got '{cell}'.", line=line, token=cell)
            labels.append([int(v) for v in cells])
    if not features:
        raise DataError(f"Dataset file '{path}' holds no examples.")
    try:
        return Dataset(np.array(features), np.array(labels), tuple(names), split)
    except ArithmeticError as e:
        raise ParseError(f"Invalid feature values in '{path}': {e}")
