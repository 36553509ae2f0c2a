"""Dual-stage data purification for noisy-label classification.

Stage 1 prunes low-quality samples via a learned per-sample weight branch;
stage 2 corrects mislabeled samples whose predictions are stable across
epochs; the final model trains on the purified dataset.
"""

from .dataset import (
    CorrectionEvent,
    Dataset,
    Sample,
    load_dataset,
    save_dataset,
    stratified_split,
)
from .model import SciuModel, forward, init_model, wce_loss
from .pipeline import PipelineConfig, run_pipeline, sweep
from .synth import SynthConfig, generate
from .trainer import TrainConfig, train_stage

__all__ = [
    "CorrectionEvent",
    "Dataset",
    "PipelineConfig",
    "Sample",
    "SciuModel",
    "SynthConfig",
    "TrainConfig",
    "forward",
    "generate",
    "init_model",
    "load_dataset",
    "run_pipeline",
    "save_dataset",
    "stratified_split",
    "sweep",
    "train_stage",
    "wce_loss",
]

__version__ = "0.1.0"
