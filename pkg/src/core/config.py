"""Configuration management."""

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from src.core.exceptions import ConfigError
from src.core.logging_config import LogLevel

PATH_KEYS = ("source_train", "target_train", "target_test", "source_test", "synth_spec")
EVAL_PATHS = ("auto", "source", "target")


@dataclass
class TrainConfig:
    """Every hyperparameter of a run. Defaults are the full-scale reference settings."""

    # data
    source_train: Optional[str] = None
    target_train: Optional[str] = None
    target_test: Optional[str] = None
    source_test: Optional[str] = None
    synth_spec: Optional[str] = None
    source_domains: Optional[List[int]] = None

    # model
    encoder_hidden: Optional[List[int]] = None
    latent_dim: int = 128
    classifier_hidden: int = 500
    use_gate: bool = True

    # optimisation
    lr: float = 1e-4
    ttt_lr: float = 2e-5
    batch_size: int = 256
    epochs: int = 20
    early_stop_patience: int = 5
    val_fraction: float = 0.1
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    # objective
    lambda1: float = 2.0
    lambda2: float = 0.5
    lambda3: float = 1.0
    beta: float = 1.5
    tau: float = 0.5

    # test-time training
    alpha1: float = 2.0
    alpha2: float = -1.0
    theta: float = 0.9
    use_ttt: bool = True
    use_cvf: bool = True
    ttt_passes: int = 1
    ttt_batch_size: Optional[int] = None

    # evaluation
    eval_path: str = "auto"
    mmd_max_samples: int = 500

    seed: int = 0

    def validate(self) -> "TrainConfig":
        if not (self.lr > 0 and self.ttt_lr > 0):
            raise ConfigError("learning rates must be positive")
        if self.early_stop_patience < 1:
            raise ConfigError("early_stop_patience must be >= 1")
        if self.batch_size < 1 or (self.ttt_batch_size is not None and self.ttt_batch_size < 1):
            raise ConfigError("batch sizes must be >= 1")
        if self.epochs < 1 or self.ttt_passes < 1:
            raise ConfigError("epochs and ttt_passes must be >= 1")
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError("val_fraction must be in (0, 1)")
        if self.latent_dim < 1 or self.classifier_hidden < 1:
            raise ConfigError("layer widths must be positive")
        if self.encoder_hidden is not None and (
            not self.encoder_hidden or min(self.encoder_hidden) < 1
        ):
            raise ConfigError("encoder_hidden must list positive widths")
        if math.isnan(self.theta):
            raise ConfigError("theta must be a number")
        if self.eval_path not in EVAL_PATHS:
            raise ConfigError(f"eval_path must be one of {EVAL_PATHS}")
        if self.mmd_max_samples < 2:
            raise ConfigError("mmd_max_samples must be >= 2")
        return self

    @property
    def effective_ttt_batch_size(self) -> int:
        return self.ttt_batch_size or self.batch_size

    def encoder_widths(self, input_dim: int) -> Tuple[int, ...]:
        """Configured widths, else 512-256 for embedding-sized input and 64-64 below that."""
        if self.encoder_hidden:
            return tuple(int(w) for w in self.encoder_hidden)
        return (512, 256) if input_dim >= 256 else (64, 64)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            config = cls(**{k: _coerce(k, v) for k, v in data.items()})
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid config value: {e}") from e
        return config.validate()

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def replace(self, **changes) -> "TrainConfig":
        unknown = sorted(set(changes) - {f.name for f in fields(self)})
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return replace(self, **changes).validate()

    def config_hash(self) -> str:
        return config_hash(self.to_dict())


_FLOAT_FIELDS = {
    "lr", "ttt_lr", "val_fraction", "adam_beta1", "adam_beta2", "adam_eps",
    "lambda1", "lambda2", "lambda3", "beta", "tau", "alpha1", "alpha2", "theta",
}
_INT_FIELDS = {
    "latent_dim", "classifier_hidden", "batch_size", "epochs", "early_stop_patience",
    "ttt_passes", "mmd_max_samples", "seed",
}
_BOOL_FIELDS = {"use_gate", "use_ttt", "use_cvf"}


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    if key in _FLOAT_FIELDS:
        return float(value)
    if key in _INT_FIELDS:
        if isinstance(value, bool) or int(value) != value:
            raise ValueError(f"{key} must be an integer, got {value!r}")
        return int(value)
    if key in _BOOL_FIELDS:
        if not isinstance(value, bool):
            raise ValueError(f"{key} must be true or false, got {value!r}")
        return value
    if key in ("encoder_hidden", "source_domains", "ttt_batch_size"):
        if key == "ttt_batch_size":
            return int(value)
        return [int(v) for v in value]
    return str(value)


def config_hash(data: Dict[str, Any]) -> str:
    """SHA-256 over canonical JSON."""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class RuntimeConfig:
    """Process-level settings that never affect results."""

    threads: int = 1
    log_level: LogLevel = LogLevel.NORMAL
    out_dir: Path = field(default_factory=lambda: Path("runs"))


class ConfigManager:
    """Loads a run configuration: defaults < file (YAML or JSON) < CLI overrides."""

    def __init__(self, config_path: Optional[Path] = None, overrides: Optional[Dict] = None):
        self.config_path = Path(config_path) if config_path else None
        self.overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        self._load_config()

    def _load_config(self):
        file_data = self.read_mapping(self.config_path) if self.config_path else {}
        if self.config_path:
            file_data = self._resolve_paths(file_data, self.config_path.parent)

        self.train = TrainConfig.from_dict({**file_data, **self.overrides})
        self.runtime = self._load_runtime_config()

    @staticmethod
    def read_mapping(path: Path) -> Dict[str, Any]:
        """Read a flat mapping; JSON parses as YAML."""
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path) as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: cannot parse config ({e})") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a mapping")
        return data

    @staticmethod
    def _resolve_paths(data: Dict[str, Any], base: Path) -> Dict[str, Any]:
        resolved = dict(data)
        for key in PATH_KEYS:
            value = resolved.get(key)
            if value and not Path(value).is_absolute():
                resolved[key] = str((base / value).resolve())
        return resolved

    @staticmethod
    def _load_runtime_config() -> RuntimeConfig:
        level_name = os.getenv("VDT_LOG_LEVEL", "normal").upper()
        if level_name not in LogLevel.__members__:
            raise ConfigError(f"VDT_LOG_LEVEL must be one of {list(LogLevel.__members__)}")
        try:
            threads = int(os.getenv("VDT_THREADS", "1"))
        except ValueError as e:
            raise ConfigError("VDT_THREADS must be an integer") from e
        return RuntimeConfig(threads=max(1, threads), log_level=LogLevel[level_name])
