from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .model import CascadeLevel, CascadeModel, ModelConfig, build_cascade, experiment_name, level_input, predict
from .trainer import LevelLog, TrainConfig, TrainingLog, train_cascade
