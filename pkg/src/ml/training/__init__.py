"""Optimizer and training loop."""

from src.ml.training.optimizer import AdamOptimizer, OptimState, adam_step
from src.ml.training.model_trainer import (
    EpochRecord,
    FitResult,
    StepLosses,
    TrainingHistory,
    VDTTrainer,
    build_architecture,
)
