"""Columnar feature dataset."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence

import numpy as np

from src.core.exceptions import ContractError, DataError
from src.core.types import Label, Sample

FEATURE_DTYPE = np.float32


@dataclass(frozen=True)
class Dataset:
    """Ordered samples stored column-wise.

    Features are kept at float32, the VDTF precision, so writing and
    re-reading a dataset is lossless. CSV input is rounded to float32 on
    load. Models cast to float64 on entry.
    """

    features: np.ndarray
    domain_ids: np.ndarray
    labels: np.ndarray
    domain_names: Dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=FEATURE_DTYPE)
        if features.ndim != 2 or features.shape[1] < 1:
            raise DataError(f"features must be a 2-D array with dim >= 1, got {features.shape}")
        if features.shape[0] == 0:
            raise DataError("dataset is empty")

        domain_ids = np.asarray(self.domain_ids, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int8)
        if domain_ids.shape != (features.shape[0],) or labels.shape != (features.shape[0],):
            raise DataError("domain_ids and labels must have one entry per sample")
        if domain_ids.min() < 0 or domain_ids.max() > np.iinfo(np.uint16).max:
            raise DataError("domain ids must fit in an unsigned 16-bit integer")
        if not np.isin(labels, (Label.PRISTINE, Label.OUT_OF_CONTEXT, Label.UNKNOWN)).all():
            raise DataError("labels must be 0, 1 or -1 (unknown)")

        names = {int(d): str(n) for d, n in self.domain_names.items()}
        for domain in np.unique(domain_ids):
            names.setdefault(int(domain), f"domain{int(domain)}")

        object.__setattr__(self, "features", features)
        object.__setattr__(self, "domain_ids", domain_ids)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "domain_names", names)

    @classmethod
    def concat(cls, datasets: Iterable["Dataset"]) -> "Dataset":
        parts = list(datasets)
        if not parts:
            raise DataError("nothing to concatenate")
        if len({p.dim for p in parts}) != 1:
            raise DataError("cannot concatenate datasets of different dims")
        names: Dict[int, str] = {}
        for part in parts:
            names.update(part.domain_names)
        return cls(
            features=np.concatenate([p.features for p in parts]),
            domain_ids=np.concatenate([p.domain_ids for p in parts]),
            labels=np.concatenate([p.labels for p in parts]),
            domain_names=names,
        )

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def domains(self) -> List[int]:
        return sorted(int(d) for d in np.unique(self.domain_ids))

    @property
    def labeled_mask(self) -> np.ndarray:
        return self.labels != Label.UNKNOWN

    @property
    def is_fully_labeled(self) -> bool:
        return bool(self.labeled_mask.all())

    def __len__(self) -> int:
        return int(self.features.shape[0])

    def __getitem__(self, index: int) -> Sample:
        return Sample(
            features=self.features[index],
            domain_id=int(self.domain_ids[index]),
            label=Label(int(self.labels[index])),
        )

    def __iter__(self) -> Iterator[Sample]:
        for index in range(len(self)):
            yield self[index]

    @property
    def samples(self) -> List[Sample]:
        return list(self)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[indices],
            domain_ids=self.domain_ids[indices],
            labels=self.labels[indices],
            domain_names=self.domain_names,
        )

    def filter_domains(
        self, keep: Optional[Iterable[int]] = None, drop: Optional[Iterable[int]] = None
    ) -> "Dataset":
        """Restrict to ``keep`` domains and/or remove ``drop`` domains."""
        mask = np.ones(len(self), dtype=bool)
        if keep is not None:
            mask &= np.isin(self.domain_ids, list(keep))
        if drop is not None:
            mask &= ~np.isin(self.domain_ids, list(drop))
        if not mask.any():
            raise DataError("domain filter removed every sample")
        return self.subset(np.flatnonzero(mask))

    def without_labels(self) -> "Dataset":
        return Dataset(
            features=self.features,
            domain_ids=self.domain_ids,
            labels=np.full(len(self), Label.UNKNOWN, dtype=np.int8),
            domain_names=self.domain_names,
        )

    def require_labeled(self, what: str = "dataset") -> None:
        if not self.is_fully_labeled:
            missing = int((~self.labeled_mask).sum())
            raise ContractError(f"{what} has {missing} unlabeled samples")
