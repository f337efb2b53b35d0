"""Principal-component projection for before/after feature diagnostics."""

from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
from scipy.linalg import eigh

from src.core.exceptions import ContractError, ShapeError
from src.data_layer.dataset import Dataset

VARIANCE_FLOOR = 1e-12


def principal_axes(X: np.ndarray, dims: int = 2):
    """Top ``dims`` eigenpairs of the covariance, eigenvalues descending.

    Each eigenvector is signed so its largest-magnitude entry is positive.
    """
    Xc = X - X.mean(axis=0, keepdims=True)
    cov = Xc.T @ Xc / max(len(X) - 1, 1)
    values, vectors = eigh(cov)
    order = np.argsort(values)[::-1][:dims]
    values, vectors = values[order], vectors[:, order]

    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return np.clip(values, 0.0, None), vectors * signs


def pca_project(X, dims: int = 2) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"pca_project expects a matrix, got shape {X.shape}")
    if len(X) <= dims:
        raise ContractError(f"pca_project needs more than {dims} rows, got {len(X)}")

    values, vectors = principal_axes(X, dims)
    coords = (X - X.mean(axis=0, keepdims=True)) @ vectors
    coords[:, values <= VARIANCE_FLOOR * max(values.max(), 1.0)] = 0.0
    if coords.shape[1] < dims:
        coords = np.hstack([coords, np.zeros((len(X), dims - coords.shape[1]))])
    return coords


def export_projection(
    dataset: Dataset, features, path: Union[str, Path], dims: int = 2
) -> Path:
    """Write ``domain,label,pc1,pc2`` rows for the given per-sample features."""
    features = np.asarray(features)
    if len(features) != len(dataset):
        raise ShapeError(f"{len(features)} feature rows for {len(dataset)} samples")
    coords = pca_project(features, dims)
    frame = pd.DataFrame(coords, columns=[f"pc{i + 1}" for i in range(dims)])
    frame.insert(0, "label", dataset.labels.astype(int))
    frame.insert(0, "domain", [dataset.domain_names[int(d)] for d in dataset.domain_ids])

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.9g")
    return path
