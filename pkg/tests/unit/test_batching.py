"""Tests for batching and validation splits."""

import numpy as np
import pytest

from src.core.exceptions import ContractError
from src.data_layer.batching import (
    batch_indices,
    batches,
    paired_batches,
    train_validation_split,
)
from src.data_layer.dataset import Dataset


def _dataset(n, dim=2, labels=None):
    labels = np.arange(n) % 2 if labels is None else labels
    return Dataset(np.arange(n * dim).reshape(n, dim), np.zeros(n), labels)


class TestBatches:
    """Test seeded batching."""

    def test_sizes(self):
        """Test the final short batch is kept."""
        assert [len(b) for b in batches(_dataset(10), 4, seed=0, epoch=0)] == [4, 4, 2]

    def test_permutation(self):
        """Test every sample appears exactly once per epoch."""
        idx = np.concatenate(batch_indices(37, 8, seed=3, epoch=2))
        assert sorted(idx) == list(range(37))

    def test_deterministic_per_epoch(self):
        """Test order depends only on seed and epoch."""
        a = batch_indices(50, 7, seed=1, epoch=4)
        b = batch_indices(50, 7, seed=1, epoch=4)
        c = batch_indices(50, 7, seed=1, epoch=5)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        assert not np.array_equal(np.concatenate(a), np.concatenate(c))

    def test_invalid_batch_size(self):
        """Test batch size must be positive."""
        with pytest.raises(ContractError):
            batch_indices(5, 0, seed=0, epoch=0)

    def test_paired_cycles_shorter_stream(self):
        """Test the shorter target stream is cycled."""
        pairs = paired_batches(_dataset(100), _dataset(60), 16, seed=0, epoch=0)
        assert len(pairs) == 7
        src = np.concatenate([s.features[:, 0] for s, _ in pairs])
        assert len(np.unique(src)) == 100
        assert all(len(t) > 0 for _, t in pairs)
        assert pairs[4][1].features.tobytes() == pairs[0][1].features.tobytes()


class TestValidationSplit:
    """Test the early-stopping hold-out split."""

    def test_sizes_and_disjoint(self):
        """Test a 10% split partitions the data."""
        ds = _dataset(100)
        train, val = train_validation_split(ds, 0.1, seed=0)
        assert len(val) == 10
        assert len(train) == 90
        keys = set(train.features[:, 0]) | set(val.features[:, 0])
        assert len(keys) == 100

    def test_stratified(self):
        """Test both classes reach the validation set."""
        _, val = train_validation_split(_dataset(100), 0.1, seed=4)
        assert set(val.labels) == {0, 1}

    def test_deterministic(self):
        """Test the split depends only on the seed."""
        a = train_validation_split(_dataset(50), 0.2, seed=9)[1]
        b = train_validation_split(_dataset(50), 0.2, seed=9)[1]
        np.testing.assert_array_equal(a.features, b.features)

    def test_single_class(self):
        """Test a single-class dataset still splits."""
        train, val = train_validation_split(_dataset(10, labels=np.zeros(10)), 0.3, seed=0)
        assert len(train) + len(val) == 10

    def test_invalid_fraction(self):
        """Test the fraction must lie in (0, 1)."""
        with pytest.raises(ContractError):
            train_validation_split(_dataset(10), 1.0, seed=0)
