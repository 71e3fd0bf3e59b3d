import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd
from natsort import natsorted

from ..errors import DataError, ParseError

logger = logging.getLogger(__name__)

# the order classes are reported in
CHESTXRAY14_CLASSES = (
    'Atelectasis', 'Cardiomegaly', 'Effusion', 'Infiltration', 'Mass', 'Nodule', 'Pneumonia',
    'Pneumothorax', 'Consolidation', 'Edema', 'Emphysema', 'Fibrosis', 'Pleural_Thickening', 'Hernia',
)
NO_FINDING = 'No Finding'
IMAGE_COLUMN = 'Image Index'
FINDINGS_COLUMN = 'Finding Labels'


def parse_label_string(s, class_names=CHESTXRAY14_CLASSES):
    """
    Multi-hot vector of a pipe-delimited findings string.

    "Cardiomegaly|Effusion" sets those two classes; "No Finding" is the
    all-zero vector. Any other token raises ParseError naming it.
    """
    index = {name: i for i, name in enumerate(class_names)}
    vector = np.zeros(len(class_names), dtype=np.int64)
    tokens = [t.strip() for t in str(s).split('|')]
    if tokens == [NO_FINDING]:
        return vector
    for token in tokens:
        if token not in index:
            raise ParseError(f"Unknown finding '{token}' in '{s}'.", token=token)
        vector[index[token]] = 1
    return vector


@dataclass(frozen=True)
class Metadata:
    """Labels of a ChestX-ray14 style metadata file; images are never read."""
    image_ids: Tuple[str, ...]
    labels: np.ndarray
    class_names: Tuple[str, ...]

    @property
    def num_images(self):
        return len(self.image_ids)


def discover_class_names(findings):
    tokens = {t.strip() for s in findings for t in str(s).split('|')}
    tokens.discard(NO_FINDING)
    return tuple(natsorted(tokens))


def read_metadata(path, class_names=CHESTXRAY14_CLASSES):
    """
    Reads image ids and labels from a metadata CSV with an 'Image Index'
    and a pipe-delimited 'Finding Labels' column; other columns, such as
    'Patient ID', are ignored. With `class_names=None` the classes are the
    findings present in the file, naturally sorted.
    """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    for column in (IMAGE_COLUMN, FINDINGS_COLUMN):
        if column not in frame.columns:
            raise ParseError(f"Metadata file '{path}' lacks the '{column}' column.", line=1, token=column)
    if frame.empty:
        raise DataError(f"Metadata file '{path}' holds no rows.")
    findings = frame[FINDINGS_COLUMN].tolist()
    if class_names is None:
        class_names = discover_class_names(findings)
    labels = np.zeros((len(findings), len(class_names)), dtype=np.int64)
    for i, s in enumerate(findings):
        try:
            labels[i] = parse_label_string(s, class_names)
        except ParseError as e:
            raise ParseError(str(e), line=i + 2, token=e.token)
    logger.info(f"Read labels of {len(findings)} images from '{path}'")
    return Metadata(tuple(frame[IMAGE_COLUMN].tolist()), labels, tuple(class_names))
