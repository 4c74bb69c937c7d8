"""Inversion network: 11-receiver pressure gathers to 256x256 obstacle masks."""

from .corpus import CorpusError, load_manifest, load_split, read_sample, split_indices
from .model import (
    InvNet,
    NetworkSpec,
    SpecError,
    VARIANTS,
    build_model,
    count_parameters,
    load_checkpoint,
    save_checkpoint,
)
from .predict import export_predictions, predict
from .train import TrainConfig, train

__all__ = [
    "CorpusError",
    "InvNet",
    "NetworkSpec",
    "SpecError",
    "TrainConfig",
    "VARIANTS",
    "build_model",
    "count_parameters",
    "export_predictions",
    "load_checkpoint",
    "load_manifest",
    "load_split",
    "predict",
    "read_sample",
    "save_checkpoint",
    "split_indices",
    "train",
]
