"""Pytest configuration and shared fixtures."""

import numpy as np
import pytest

from src.core.config import TrainConfig
from src.core.logging_config import LogLevel, get_logger
from src.data_layer.dataset import Dataset
from src.data_layer.synthetic import DomainShift, SynthSpec
from src.experiments.config import DomainSplits
from src.ml.models.vdt_model import Architecture, ModelParams
from src.ml.training.model_trainer import VDTTrainer


@pytest.fixture(autouse=True)
def reset_log_level():
    """Restore the shared logger's verbosity after every test."""
    yield
    get_logger().set_level(LogLevel.NORMAL)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_dataset(rng):
    """Twenty labeled samples over two domains."""
    return Dataset(
        features=rng.standard_normal((20, 6)),
        domain_ids=np.repeat([0, 1], 10),
        labels=np.tile([0, 1], 10),
        domain_names={0: "bbc", 1: "guardian"},
    )


@pytest.fixture
def tiny_spec():
    """Two small, easily separable domains with a rotated target."""
    return SynthSpec(
        dim=8,
        seed=3,
        domains=(
            DomainShift(name="source", separation=4.0, train_count=240, test_count=80),
            DomainShift(
                name="target",
                rotation_deg=20.0,
                shift_scale=1.0,
                separation=4.0,
                train_count=160,
                test_count=80,
            ),
        ),
    )


@pytest.fixture
def tiny_splits(tiny_spec):
    return DomainSplits.from_synth(tiny_spec)


@pytest.fixture
def tiny_config():
    """Fast settings for end-to-end runs on ``tiny_spec``."""
    return TrainConfig(
        encoder_hidden=[16],
        latent_dim=8,
        classifier_hidden=16,
        lr=1e-3,
        ttt_lr=1e-4,
        batch_size=64,
        epochs=3,
        early_stop_patience=2,
        mmd_max_samples=100,
        seed=0,
    )


@pytest.fixture
def small_arch():
    return Architecture(input_dim=6, encoder_hidden=(5, 4), latent_dim=3, classifier_hidden=7)


@pytest.fixture
def small_params(small_arch):
    return ModelParams.initialize(small_arch, seed=0)


@pytest.fixture
def trained_tiny(tiny_splits, tiny_config):
    """Parameters fitted on ``tiny_spec`` at a learning rate that converges in a few epochs."""
    config = tiny_config.replace(lr=1e-2, epochs=8, early_stop_patience=8)
    return VDTTrainer(config).fit(tiny_splits.source_train, tiny_splits.target_train).params
