"""Shared enums and value types."""

from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np


class Label(IntEnum):
    """Binary news-pair label; UNKNOWN marks unlabeled target samples."""

    PRISTINE = 0
    OUT_OF_CONTEXT = 1
    UNKNOWN = -1


class DomainPath(Enum):
    """Selects which mean/log-variance head pair an encoding uses."""

    SOURCE = "source"
    TARGET = "target"


@dataclass(frozen=True)
class Sample:
    """One precomputed feature vector with its domain and label."""

    features: np.ndarray
    domain_id: int
    label: Label = Label.UNKNOWN

    @property
    def is_labeled(self) -> bool:
        return self.label != Label.UNKNOWN
