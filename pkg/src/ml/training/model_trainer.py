"""Joint source/target training with early stopping on source validation F1."""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.analysis.metrics import macro_f1
from src.autodiff import Node, backward, constant, take_rows
from src.core.config import TrainConfig
from src.core.exceptions import DataError
from src.core.logging_config import get_logger
from src.core.types import DomainPath
from src.data_layer.batching import paired_batches, train_validation_split
from src.data_layer.dataset import Dataset
from src.ml.losses import (
    LossWeights,
    cls_loss,
    dcc_loss,
    diva_loss,
    kl_loss,
    recon_loss,
    total_loss,
)
from src.ml.models.vdt_model import (
    Architecture,
    ModelParams,
    ParamBinding,
    classify,
    decode,
    encode,
    gate_features,
    predict,
    reparameterize,
)
from src.ml.training.optimizer import AdamOptimizer

logger = get_logger()

LOSS_NAMES = ("cls", "diva", "recon", "kl", "total")


@dataclass(frozen=True)
class StepLosses:
    cls: float
    diva: float
    recon: float
    kl: float
    dcc: float
    total: float


@dataclass
class EpochRecord:
    epoch: int
    cls: float
    diva: float
    recon: float
    kl: float
    total: float
    val_f1: float
    steps: int


@dataclass
class TrainingHistory:
    epochs: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_f1: float = -1.0
    stopped_epoch: int = 0
    early_stopped: bool = False

    def loss_curves(self) -> Dict[str, List[float]]:
        return {name: [getattr(r, name) for r in self.epochs] for name in LOSS_NAMES}

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainingHistory":
        data = dict(data)
        data["epochs"] = [EpochRecord(**r) for r in data.get("epochs", [])]
        return cls(**data)


@dataclass
class FitResult:
    params: ModelParams
    history: TrainingHistory


def build_architecture(config: TrainConfig, input_dim: int) -> Architecture:
    return Architecture(
        input_dim=input_dim,
        encoder_hidden=config.encoder_widths(input_dim),
        latent_dim=config.latent_dim,
        classifier_hidden=config.classifier_hidden,
    )


def class_matched_pairs(
    source_labels: np.ndarray, target_pseudo: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Row indices pairing source rows with target rows of the same class.

    Target classes come from the model's own predictions. Within a class both
    sides keep batch order and surplus rows on the longer side are dropped.
    """
    source_labels = np.asarray(source_labels)
    target_pseudo = np.asarray(target_pseudo)
    src_rows, tgt_rows = [], []
    for c in np.unique(source_labels):
        s = np.flatnonzero(source_labels == c)
        t = np.flatnonzero(target_pseudo == c)
        k = min(len(s), len(t))
        src_rows.append(s[:k])
        tgt_rows.append(t[:k])
    if not src_rows:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    return np.concatenate(src_rows), np.concatenate(tgt_rows)


class VDTTrainer:
    """Trains all parameters on labeled source and unlabeled target batches."""

    def __init__(self, config: TrainConfig):
        self.config = config.validate()
        self.weights = LossWeights.from_config(config)

    def compute_losses(
        self,
        binding: ParamBinding,
        src_batch: Dataset,
        tgt_batch: Dataset,
        rng: np.random.Generator,
    ) -> Tuple[Node, StepLosses]:
        """Forward both paths and assemble the weighted objective."""
        cfg = self.config
        src_batch.require_labeled("source batch")
        X_s, X_t = src_batch.features, tgt_batch.features

        stats_s = encode(binding, X_s, DomainPath.SOURCE)
        stats_t = encode(binding, X_t, DomainPath.TARGET)

        probs = classify(binding, gate_features(stats_s, cfg.use_gate))
        l_cls = cls_loss(probs, src_batch.labels)

        # positives share a class: source labels against target-path predictions
        tgt_probs = classify(binding, constant(gate_features(stats_t, cfg.use_gate).value))
        tgt_pseudo = np.argmax(tgt_probs.value, axis=1)
        src_rows, tgt_rows = class_matched_pairs(src_batch.labels, tgt_pseudo)
        if len(src_rows) >= 2:
            l_diva = diva_loss(
                take_rows(stats_s.mu, src_rows), take_rows(stats_t.mu, tgt_rows), cfg.tau
            )
        else:
            l_diva = constant(0.0)

        xhat_s = decode(binding, reparameterize(stats_s, rng))
        xhat_t = decode(binding, reparameterize(stats_t, rng))
        l_recon = recon_loss(X_s, xhat_s, X_t, xhat_t)
        l_kl = kl_loss(stats_s, stats_t)
        l_dcc = dcc_loss(l_recon, l_kl, self.weights.beta)

        objective = total_loss(l_cls, l_diva, l_dcc, self.weights)
        losses = StepLosses(
            cls=l_cls.item(),
            diva=l_diva.item(),
            recon=l_recon.item(),
            kl=l_kl.item(),
            dcc=l_dcc.item(),
            total=objective.item(),
        )
        return objective, losses

    def train_step(
        self,
        params: ModelParams,
        src_batch: Dataset,
        tgt_batch: Dataset,
        optimizer: AdamOptimizer,
        rng: np.random.Generator,
    ) -> StepLosses:
        """One Adam step on every parameter group. Target labels are never read."""
        binding = ParamBinding(params, trainable=params.names())
        objective, losses = self.compute_losses(binding, src_batch, tgt_batch, rng)
        backward(objective)
        optimizer.step(binding.gradients())
        return losses

    def validation_f1(self, params: ModelParams, val_set: Dataset) -> float:
        preds, _ = predict(params, val_set.features, DomainPath.SOURCE, self.config.use_gate)
        return macro_f1(preds, val_set.labels)

    def fit(
        self, source: Dataset, target: Dataset, params: Optional[ModelParams] = None
    ) -> FitResult:
        """Train for up to ``epochs`` epochs and return the best-validation parameters."""
        cfg = self.config
        if len(source) == 0 or len(target) == 0:
            raise DataError("training needs non-empty source and target sets")
        if source.dim != target.dim:
            raise DataError(f"source dim {source.dim} != target dim {target.dim}")
        source.require_labeled("source training set")
        target = target.without_labels()

        train_set, val_set = train_validation_split(source, cfg.val_fraction, cfg.seed)
        if params is None:
            params = ModelParams.initialize(build_architecture(cfg, source.dim), cfg.seed)
        optimizer = AdamOptimizer.from_config(params, params.names(), cfg.lr, cfg)
        rng = np.random.default_rng([cfg.seed, 1])

        logger.info(
            "Training started",
            source=len(train_set),
            validation=len(val_set),
            target=len(target),
            parameters=params.num_parameters(),
        )

        history = TrainingHistory()
        best_params = params.copy()
        for epoch in range(1, cfg.epochs + 1):
            steps = [
                self.train_step(params, sb, tb, optimizer, rng)
                for sb, tb in paired_batches(train_set, target, cfg.batch_size, cfg.seed, epoch)
            ]
            val_f1 = self.validation_f1(params, val_set)
            record = EpochRecord(
                epoch=epoch,
                **{name: float(np.mean([getattr(s, name) for s in steps])) for name in LOSS_NAMES},
                val_f1=val_f1,
                steps=len(steps),
            )
            history.epochs.append(record)
            history.stopped_epoch = epoch
            logger.verbose(
                f"Epoch {epoch}/{cfg.epochs}",
                cls=record.cls,
                diva=record.diva,
                recon=record.recon,
                kl=record.kl,
                total=record.total,
                val_f1=val_f1,
            )

            if val_f1 > history.best_val_f1:
                history.best_val_f1 = val_f1
                history.best_epoch = epoch
                best_params = params.copy()
            elif epoch - history.best_epoch >= cfg.early_stop_patience:
                history.early_stopped = True
                logger.info("Early stopping", epoch=epoch, best_epoch=history.best_epoch)
                break

        logger.info(
            "Training complete", best_epoch=history.best_epoch, best_val_f1=history.best_val_f1
        )
        return FitResult(params=best_params, history=history)
