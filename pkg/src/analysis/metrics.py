"""Classification scores and the MMD two-sample statistic."""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from src.core.exceptions import ContractError, ShapeError
from src.core.types import Label


@dataclass(frozen=True)
class ClassCounts:
    tp: int
    fp: int
    tn: int
    fn: int


@dataclass(frozen=True)
class EvalResult:
    """Accuracy and F1 for the binary pristine (real) / out-of-context (fake) task."""

    accuracy: float
    f1_macro: float
    f1_real: float
    f1_fake: float
    real: ClassCounts
    fake: ClassCounts
    total: int

    def summary(self) -> str:
        return (
            f"acc={self.accuracy:.4f} macro_f1={self.f1_macro:.4f} "
            f"f1_real={self.f1_real:.4f} f1_fake={self.f1_fake:.4f} n={self.total}"
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalResult":
        return cls(
            **{k: v for k, v in data.items() if k not in ("real", "fake")},
            real=ClassCounts(**data["real"]),
            fake=ClassCounts(**data["fake"]),
        )


def evaluate(preds, labels) -> EvalResult:
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if preds.shape != labels.shape or preds.ndim != 1:
        raise ShapeError(f"evaluate: {preds.shape} predictions vs {labels.shape} labels")
    if preds.size == 0:
        raise ContractError("evaluate: empty input")
    classes = [Label.PRISTINE, Label.OUT_OF_CONTEXT]
    if not np.isin(labels, classes).all():
        raise ContractError("evaluate: labels must be 0 or 1")
    if not np.isin(preds, classes).all():
        raise ContractError("evaluate: predictions must be 0 or 1")

    cm = confusion_matrix(labels, preds, labels=classes)
    _, _, f1, _ = precision_recall_fscore_support(
        labels, preds, labels=classes, average=None, zero_division=0
    )
    total = int(cm.sum())

    def counts(c: int) -> ClassCounts:
        tp = int(cm[c, c])
        fp = int(cm[:, c].sum()) - tp
        fn = int(cm[c, :].sum()) - tp
        return ClassCounts(tp=tp, fp=fp, tn=total - tp - fp - fn, fn=fn)

    f1_real, f1_fake = float(f1[0]), float(f1[1])
    return EvalResult(
        accuracy=float(np.trace(cm)) / total,
        f1_macro=(f1_real + f1_fake) / 2.0,
        f1_real=f1_real,
        f1_fake=f1_fake,
        real=counts(0),
        fake=counts(1),
        total=total,
    )


def macro_f1(preds, labels) -> float:
    return evaluate(preds, labels).f1_macro


@dataclass(frozen=True)
class MMDResult:
    statistic: float
    bandwidth: float
    n_a: int
    n_b: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MMDResult":
        return cls(**data)


def median_bandwidth(pooled: np.ndarray) -> float:
    """Median pairwise Euclidean distance; 1.0 when every point coincides."""
    h = float(np.median(pdist(pooled)))
    return h if h > 0 else 1.0


def mmd(A, B, max_samples: Optional[int] = None, seed: int = 0) -> MMDResult:
    """Biased squared MMD with an RBF kernel at the median-heuristic bandwidth.

    Sets larger than ``max_samples`` are replaced by a seeded subsample.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise ShapeError(f"mmd: incompatible sample shapes {A.shape} and {B.shape}")
    if len(A) < 2 or len(B) < 2:
        raise ContractError("mmd needs at least two points per sample")

    if max_samples is not None:
        rng = np.random.default_rng(seed)
        if len(A) > max_samples:
            A = A[np.sort(rng.choice(len(A), max_samples, replace=False))]
        if len(B) > max_samples:
            B = B[np.sort(rng.choice(len(B), max_samples, replace=False))]

    h = median_bandwidth(np.vstack([A, B]))
    gamma = 1.0 / (2.0 * h * h)

    k_aa = np.exp(-gamma * cdist(A, A, "sqeuclidean")).mean()
    k_bb = np.exp(-gamma * cdist(B, B, "sqeuclidean")).mean()
    k_ab = np.exp(-gamma * cdist(A, B, "sqeuclidean")).mean()
    statistic = max(0.0, float(k_aa + k_bb - 2.0 * k_ab))
    return MMDResult(statistic=statistic, bandwidth=h, n_a=len(A), n_b=len(B))
