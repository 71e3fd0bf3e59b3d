from .chestxray import CHESTXRAY14_CLASSES, NO_FINDING, Metadata, parse_label_string, read_metadata
from .csv_io import read_csv, write_csv
from .dataset import Dataset, split_indices
from .stats import ClassStats, CoOccurrence, class_stats
from .synth import DependencyRule, SynthSpec, generate, load_synth_spec
