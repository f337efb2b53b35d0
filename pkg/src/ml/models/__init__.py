"""Variational encoder model and checkpoint files."""

from src.ml.models.vdt_model import (
    PARAMETER_GROUPS,
    Architecture,
    LatentStats,
    ModelParams,
    ParamBinding,
    classify,
    decode,
    encode,
    gate_features,
    gated_features,
    predict,
    reparameterize,
)
from src.ml.models.checkpoint import load_checkpoint, save_checkpoint
