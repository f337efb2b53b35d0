"""Seeded synthetic domain-shifted feature datasets.

Each domain draws class-conditional isotropic Gaussians. The class-c mean is
``R(theta) @ (c * separation * u) + shift_scale * v`` where ``u`` and ``v`` are
unit vectors fixed by the seed and ``R`` rotates the first two coordinates.
"""

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import yaml

from src.core.exceptions import ConfigError
from src.core.logging_config import get_logger
from src.data_layer.dataset import Dataset

logger = get_logger()

SPLITS = {"train": 0, "test": 1}


@dataclass(frozen=True)
class DomainShift:
    """Generation parameters for one domain."""

    name: str
    rotation_deg: float = 0.0
    shift_scale: float = 0.0
    separation: float = 3.0
    noise: float = 1.0
    train_count: int = 4000
    test_count: int = 1000

    def validate(self):
        if self.train_count <= 0 or self.test_count <= 0:
            raise ConfigError(f"domain {self.name}: sample counts must be positive")
        if not self.noise > 0:
            raise ConfigError(f"domain {self.name}: noise sigma must be positive")


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic benchmark description."""

    dim: int = 32
    domains: Tuple[DomainShift, ...] = field(default_factory=tuple)
    seed: int = 0
    classes: int = 2
    target_domains: Optional[Tuple[int, ...]] = None

    def validate(self):
        if self.dim < 2:
            raise ConfigError("synthetic dim must be at least 2 for the planar rotation")
        if self.classes != 2:
            raise ConfigError("only binary synthetic data is supported")
        if not self.domains:
            raise ConfigError("synthetic spec needs at least one domain")
        for domain in self.domains:
            domain.validate()
        for index in self.resolved_target_domains:
            if not 0 <= index < len(self.domains):
                raise ConfigError(f"target domain {index} out of range")

    @property
    def resolved_target_domains(self) -> Tuple[int, ...]:
        if self.target_domains is None:
            return (len(self.domains) - 1,)
        return tuple(self.target_domains)

    @property
    def source_domains(self) -> Tuple[int, ...]:
        targets = set(self.resolved_target_domains)
        return tuple(i for i in range(len(self.domains)) if i not in targets)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SynthSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown synthetic spec keys: {sorted(unknown)}")

        domain_keys = {f.name for f in fields(DomainShift)}
        domains = []
        for i, entry in enumerate(data.get("domains", [])):
            extra = set(entry) - domain_keys
            if extra:
                raise ConfigError(f"domain {i}: unknown keys {sorted(extra)}")
            domains.append(DomainShift(**{"name": f"domain{i}", **entry}))

        targets = data.get("target_domains")
        spec = cls(
            dim=int(data.get("dim", 32)),
            domains=tuple(domains),
            seed=int(data.get("seed", 0)),
            classes=int(data.get("classes", 2)),
            target_domains=tuple(int(t) for t in targets) if targets is not None else None,
        )
        spec.validate()
        return spec

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SynthSpec":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"synthetic spec not found: {path}")
        with open(path) as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: synthetic spec must be a mapping")
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["domains"] = [asdict(d) for d in self.domains]
        data["target_domains"] = list(self.resolved_target_domains)
        return data


def _directions(spec: SynthSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Class direction ``u`` (in the rotation plane) and shift direction ``v``."""
    rng = np.random.default_rng(spec.seed)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    u = np.zeros(spec.dim)
    u[0], u[1] = np.cos(phi), np.sin(phi)
    v = rng.standard_normal(spec.dim)
    v /= np.linalg.norm(v)
    return u, v


def _rotation(dim: int, degrees: float) -> np.ndarray:
    theta = np.deg2rad(degrees)
    rot = np.eye(dim)
    rot[0, 0], rot[0, 1] = np.cos(theta), -np.sin(theta)
    rot[1, 0], rot[1, 1] = np.sin(theta), np.cos(theta)
    return rot


def class_means(spec: SynthSpec, domain_index: int) -> np.ndarray:
    """Specified means, one row per class."""
    domain = spec.domains[domain_index]
    u, v = _directions(spec)
    rot = _rotation(spec.dim, domain.rotation_deg)
    shift = domain.shift_scale * v
    return np.stack([rot @ (c * domain.separation * u) + shift for c in range(spec.classes)])


def synth(
    spec: SynthSpec, split: str = "train", domains: Optional[Tuple[int, ...]] = None
) -> Dataset:
    """Draw every requested domain of ``split``; deterministic given ``spec``."""
    spec.validate()
    if split not in SPLITS:
        raise ConfigError(f"unknown split {split!r}")
    domains = tuple(range(len(spec.domains))) if domains is None else tuple(domains)

    features, domain_ids, labels = [], [], []
    for index in domains:
        domain = spec.domains[index]
        count = domain.train_count if split == "train" else domain.test_count
        rng = np.random.default_rng([spec.seed, index, SPLITS[split]])

        y = rng.permutation(np.arange(count) % spec.classes)
        means = class_means(spec, index)
        x = means[y] + domain.noise * rng.standard_normal((count, spec.dim))

        features.append(x)
        domain_ids.append(np.full(count, index))
        labels.append(y)

    dataset = Dataset(
        features=np.concatenate(features),
        domain_ids=np.concatenate(domain_ids),
        labels=np.concatenate(labels),
        domain_names={i: spec.domains[i].name for i in domains},
    )
    logger.verbose("Synthetic data drawn", split=split, samples=len(dataset), domains=len(domains))
    return dataset
