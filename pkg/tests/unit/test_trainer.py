"""Tests for joint source/target training."""

import numpy as np
import pytest

from src.analysis.metrics import macro_f1
from src.core.exceptions import ContractError, DataError
from src.core.types import DomainPath
from src.data_layer.dataset import Dataset
from src.ml.models.vdt_model import ModelParams, ParamBinding, predict
from src.ml.training.model_trainer import (
    TrainingHistory,
    VDTTrainer,
    build_architecture,
    class_matched_pairs,
)
from src.ml.training.optimizer import AdamOptimizer


@pytest.fixture
def fitted(tiny_splits, tiny_config):
    return VDTTrainer(tiny_config).fit(tiny_splits.source_train, tiny_splits.target_train)


class TestBuildArchitecture:
    """Test architecture selection."""

    def test_configured_widths(self, tiny_config):
        """Test configured widths override the defaults."""
        arch = build_architecture(tiny_config, 8)
        assert arch.encoder_hidden == (16,)
        assert arch.latent_dim == 8

    def test_default_widths_follow_input(self, tiny_config):
        """Test embedding-sized input gets the wider encoder."""
        config = tiny_config.replace(encoder_hidden=None)
        assert build_architecture(config, 512).encoder_hidden == (512, 256)
        assert build_architecture(config, 32).encoder_hidden == (64, 64)


class TestClassMatchedPairs:
    """Test source/target row pairing for the contrastive term."""

    def test_pairs_share_class(self):
        """Test every pair joins a source label with the same target prediction."""
        labels = np.array([0, 1, 1, 0, 1])
        pseudo = np.array([1, 1, 0, 0, 0])
        src, tgt = class_matched_pairs(labels, pseudo)
        assert src.tolist() == [0, 3, 1, 2]
        assert tgt.tolist() == [2, 3, 0, 1]
        np.testing.assert_array_equal(labels[src], pseudo[tgt])

    def test_missing_class_drops_out(self):
        """Test a class the target side never predicts contributes no pairs."""
        src, tgt = class_matched_pairs(np.array([0, 1, 1]), np.zeros(4, dtype=int))
        assert src.tolist() == [0]
        assert tgt.tolist() == [0]

    def test_empty(self):
        """Test empty batches give empty index arrays."""
        src, tgt = class_matched_pairs(np.zeros(0, dtype=int), np.zeros(0, dtype=int))
        assert len(src) == len(tgt) == 0


class TestComputeLosses:
    """Test one forward pass of the objective."""

    def test_components_finite(self, tiny_splits, tiny_config):
        """Test every reported loss is finite and total matches the weights."""
        trainer = VDTTrainer(tiny_config)
        params = ModelParams.initialize(build_architecture(tiny_config, 8), 0)
        src = tiny_splits.source_train.subset(np.arange(32))
        tgt = tiny_splits.target_train.subset(np.arange(20))
        objective, losses = trainer.compute_losses(
            ParamBinding(params), src, tgt, np.random.default_rng(0)
        )
        values = [losses.cls, losses.diva, losses.recon, losses.kl, losses.dcc, losses.total]
        assert np.isfinite(values).all()
        assert losses.dcc == pytest.approx(losses.recon + tiny_config.beta * losses.kl)
        expected = (
            tiny_config.lambda1 * losses.cls
            + tiny_config.lambda2 * losses.diva
            + tiny_config.lambda3 * losses.dcc
        )
        assert objective.item() == pytest.approx(expected)

    def test_single_pair_skips_alignment(self, tiny_splits, tiny_config):
        """Test a one-row pairing contributes no contrastive term."""
        trainer = VDTTrainer(tiny_config)
        params = ModelParams.initialize(build_architecture(tiny_config, 8), 0)
        _, losses = trainer.compute_losses(
            ParamBinding(params),
            tiny_splits.source_train.subset([0]),
            tiny_splits.target_train.subset([0, 1]),
            np.random.default_rng(0),
        )
        assert losses.diva == 0.0

    def test_alignment_needs_matching_classes(self, tiny_splits, tiny_config):
        """Test no contrastive term when the target side predicts no source class."""
        trainer = VDTTrainer(tiny_config)
        params = ModelParams.initialize(build_architecture(tiny_config, 8), 0)
        params.update({"classifier.1.bias": np.array([50.0, 0.0])})
        source = tiny_splits.source_train
        ones = source.subset(np.flatnonzero(source.labels == 1)[:8])
        _, losses = trainer.compute_losses(
            ParamBinding(params),
            ones,
            tiny_splits.target_train.subset(np.arange(8)),
            np.random.default_rng(0),
        )
        assert losses.diva == 0.0
        assert losses.cls > 0.0

    def test_unlabeled_source_batch(self, tiny_splits, tiny_config):
        """Test source batches must be labeled."""
        trainer = VDTTrainer(tiny_config)
        params = ModelParams.initialize(build_architecture(tiny_config, 8), 0)
        src = tiny_splits.source_train.subset(np.arange(4)).without_labels()
        with pytest.raises(ContractError):
            trainer.compute_losses(ParamBinding(params), src, src, np.random.default_rng(0))

    def test_train_step_updates_every_group(self, tiny_splits, tiny_config):
        """Test one step moves encoder, heads, decoder and classifier."""
        trainer = VDTTrainer(tiny_config)
        params = ModelParams.initialize(build_architecture(tiny_config, 8), 0)
        before = params.copy()
        optimizer = AdamOptimizer(params, params.names(), lr=1e-3)
        trainer.train_step(
            params,
            tiny_splits.source_train.subset(np.arange(16)),
            tiny_splits.target_train.subset(np.arange(16)),
            optimizer,
            np.random.default_rng(0),
        )
        for name in (
            "encoder.0.weight",
            "source_mu.weight",
            "target_mu.weight",
            "decoder.0.weight",
            "classifier.1.weight",
        ):
            assert not np.array_equal(before[name], params[name]), name


class TestFit:
    """Test the training loop."""

    def test_history(self, fitted, tiny_config):
        """Test one record per epoch with finite losses."""
        history = fitted.history
        assert 1 <= len(history.epochs) <= tiny_config.epochs
        assert [r.epoch for r in history.epochs] == list(range(1, len(history.epochs) + 1))
        assert 1 <= history.best_epoch <= history.stopped_epoch
        assert 0.0 <= history.best_val_f1 <= 1.0
        for record in history.epochs:
            assert np.isfinite([record.cls, record.diva, record.recon, record.kl]).all()
            assert record.steps == 4

    def test_learns_source_task(self, tiny_splits, tiny_config):
        """Test separable source data reaches a useful validation F1."""
        config = tiny_config.replace(lr=1e-2, epochs=8, early_stop_patience=8)
        result = VDTTrainer(config).fit(tiny_splits.source_train, tiny_splits.target_train)
        assert result.history.best_val_f1 > 0.7

    def test_target_path_classifies_target(self, trained_tiny, tiny_splits):
        """Test the target path scores the shifted domain close to the source path."""
        test = tiny_splits.target_test
        src_preds, _ = predict(trained_tiny, test.features, DomainPath.SOURCE)
        tgt_preds, _ = predict(trained_tiny, test.features, DomainPath.TARGET)
        target_f1 = macro_f1(tgt_preds, test.labels)
        assert target_f1 > 0.7
        assert target_f1 >= macro_f1(src_preds, test.labels) - 0.15

    def test_deterministic(self, tiny_splits, tiny_config, fitted):
        """Test a second run with the same seed is bit-identical."""
        again = VDTTrainer(tiny_config).fit(tiny_splits.source_train, tiny_splits.target_train)
        names = fitted.params.names()
        assert all(again.params[n].tobytes() == fitted.params[n].tobytes() for n in names)

    def test_target_labels_never_read(self, tiny_splits, tiny_config, fitted):
        """Test permuting target labels leaves the trained parameters unchanged."""
        target = tiny_splits.target_train
        shuffled = Dataset(
            features=target.features,
            domain_ids=target.domain_ids,
            labels=np.random.default_rng(5).permutation(target.labels),
        )
        again = VDTTrainer(tiny_config).fit(tiny_splits.source_train, shuffled)
        names = fitted.params.names()
        assert all(again.params[n].tobytes() == fitted.params[n].tobytes() for n in names)

    def test_early_stopping(self, tiny_splits, tiny_config):
        """Test training stops after patience epochs without improvement."""
        config = tiny_config.replace(lr=1e-12, epochs=6, early_stop_patience=1)
        history = VDTTrainer(config).fit(
            tiny_splits.source_train, tiny_splits.target_train
        ).history
        assert history.early_stopped
        assert history.best_epoch == 1
        assert history.stopped_epoch == 2

    def test_unlabeled_source(self, tiny_splits, tiny_config):
        """Test an unlabeled source set is rejected."""
        with pytest.raises(ContractError):
            VDTTrainer(tiny_config).fit(
                tiny_splits.source_train.without_labels(), tiny_splits.target_train
            )

    def test_dim_mismatch(self, tiny_splits, tiny_config):
        """Test source and target must share a feature width."""
        target = Dataset(np.zeros((10, 3)), np.zeros(10), np.zeros(10))
        with pytest.raises(DataError):
            VDTTrainer(tiny_config).fit(tiny_splits.source_train, target)


class TestTrainingHistory:
    """Test history serialisation."""

    def test_round_trip(self, fitted):
        """Test to_dict and from_dict agree."""
        history = fitted.history
        assert TrainingHistory.from_dict(history.to_dict()) == history

    def test_loss_curves(self, fitted):
        """Test curves list one value per epoch for every loss."""
        curves = fitted.history.loss_curves()
        assert set(curves) == {"cls", "diva", "recon", "kl", "total"}
        assert all(len(v) == len(fitted.history.epochs) for v in curves.values())
