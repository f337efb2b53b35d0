"""Seeded shuffling, batching and validation splits."""

from typing import List, Tuple

import numpy as np
from sklearn.model_selection import train_test_split

from src.core.exceptions import ContractError, DataError
from src.data_layer.dataset import Dataset


def batch_indices(
    n: int, batch_size: int, seed: int, epoch: int, stream: int = 0
) -> List[np.ndarray]:
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}")
    order = np.random.default_rng([seed, epoch, stream]).permutation(n)
    return [order[start : start + batch_size] for start in range(0, n, batch_size)]


def batches(
    dataset: Dataset, batch_size: int, seed: int, epoch: int, stream: int = 0
) -> List[Dataset]:
    """One epoch of shuffled batches; the final short batch is kept."""
    return [
        dataset.subset(idx)
        for idx in batch_indices(len(dataset), batch_size, seed, epoch, stream)
    ]


def paired_batches(
    source: Dataset, target: Dataset, batch_size: int, seed: int, epoch: int
) -> List[Tuple[Dataset, Dataset]]:
    """Pair source and target batches by step; the shorter stream is cycled."""
    src = batches(source, batch_size, seed, epoch, stream=0)
    tgt = batches(target, batch_size, seed, epoch, stream=1)
    steps = max(len(src), len(tgt))
    return [(src[i % len(src)], tgt[i % len(tgt)]) for i in range(steps)]


def train_validation_split(
    dataset: Dataset, fraction: float, seed: int
) -> Tuple[Dataset, Dataset]:
    """Seeded split, stratified by label when every class has two members."""
    if not 0.0 < fraction < 1.0:
        raise ContractError(f"validation fraction must be in (0, 1), got {fraction}")
    if len(dataset) < 2:
        raise DataError("need at least two samples to hold out a validation set")

    _, counts = np.unique(dataset.labels, return_counts=True)
    n_val = int(np.ceil(fraction * len(dataset)))
    can_stratify = counts.min() >= 2 and len(counts) <= min(n_val, len(dataset) - n_val)
    stratify = dataset.labels if can_stratify else None
    train_idx, val_idx = train_test_split(
        np.arange(len(dataset)), test_size=fraction, random_state=seed, stratify=stratify
    )
    return dataset.subset(np.sort(train_idx)), dataset.subset(np.sort(val_idx))
