"""Experiment-level types: ablation flags, domain splits and run reports."""

import json
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Optional

from src.analysis.metrics import EvalResult, MMDResult
from src.core.config import TrainConfig
from src.core.exceptions import ConfigError, DataError
from src.core.logging_config import get_logger
from src.data_layer.dataset import Dataset
from src.data_layer.feature_io import load_dataset
from src.data_layer.synthetic import SynthSpec, synth
from src.ml.online_learning.test_time import TTTReport
from src.ml.training.model_trainer import TrainingHistory

logger = get_logger()

_FLAGS = ("no_diva", "no_dcc", "no_ttt", "no_cvf", "no_gate")


@dataclass(frozen=True)
class AblationSpec:
    """Independent switches that remove one component each."""

    no_diva: bool = False
    no_dcc: bool = False
    no_ttt: bool = False
    no_cvf: bool = False
    no_gate: bool = False
    drop_source_domain: Optional[int] = None

    @classmethod
    def parse(cls, token: str) -> "AblationSpec":
        """``full``, ``drop:<id>`` or flags joined with ``+`` such as ``no_diva+no_dcc``."""
        token = token.strip()
        if token in ("", "full"):
            return cls()
        flags: Dict[str, Any] = {}
        for part in token.split("+"):
            part = part.strip()
            if part.startswith("drop:"):
                try:
                    flags["drop_source_domain"] = int(part[len("drop:") :])
                except ValueError as e:
                    raise ConfigError(f"bad domain id in variant {token!r}") from e
            elif part in _FLAGS:
                flags[part] = True
            else:
                raise ConfigError(
                    f"unknown ablation flag {part!r} (expected one of {_FLAGS} or drop:<id>)"
                )
        return cls(**flags)

    @property
    def name(self) -> str:
        parts = [f for f in _FLAGS if getattr(self, f)]
        if self.drop_source_domain is not None:
            parts.append(f"drop:{self.drop_source_domain}")
        return "+".join(parts) or "full"

    def apply(self, config: TrainConfig) -> TrainConfig:
        changes: Dict[str, Any] = {}
        if self.no_diva:
            changes["lambda2"] = 0.0
        if self.no_dcc:
            changes["lambda3"] = 0.0
        if self.no_ttt:
            changes["use_ttt"] = False
        if self.no_cvf:
            changes["use_cvf"] = False
        if self.no_gate:
            changes["use_gate"] = False
        return config.replace(**changes) if changes else config

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class DomainSplits:
    """Labeled source training data, unlabeled target training data and target test data."""

    source_train: Dataset
    target_train: Dataset
    target_test: Dataset
    source_test: Optional[Dataset] = None

    @classmethod
    def from_config(cls, config: TrainConfig) -> "DomainSplits":
        if config.synth_spec:
            return cls.from_synth(SynthSpec.from_file(config.synth_spec))
        required = ("source_train", "target_train", "target_test")
        missing = [k for k in required if not getattr(config, k)]
        if missing:
            raise ConfigError(f"config must set {missing} or synth_spec")
        return cls(
            source_train=load_dataset(config.source_train),
            target_train=load_dataset(config.target_train),
            target_test=load_dataset(config.target_test),
            source_test=load_dataset(config.source_test) if config.source_test else None,
        )

    @classmethod
    def from_synth(cls, spec: SynthSpec) -> "DomainSplits":
        sources, targets = spec.source_domains, spec.resolved_target_domains
        if not sources:
            raise ConfigError("synthetic spec has no source domain")
        return cls(
            source_train=synth(spec, "train", sources),
            target_train=synth(spec, "train", targets),
            target_test=synth(spec, "test", targets),
            source_test=synth(spec, "test", sources),
        )

    def for_run(self, config: TrainConfig, ablation: "AblationSpec") -> "DomainSplits":
        """Apply source-domain selection; target labels are removed from training data."""
        source = self.source_train
        if config.source_domains is not None:
            source = source.filter_domains(keep=config.source_domains)
        if ablation.drop_source_domain is not None:
            if ablation.drop_source_domain not in source.domains:
                raise DataError(f"source domain {ablation.drop_source_domain} not present")
            source = source.filter_domains(drop=[ablation.drop_source_domain])
        return DomainSplits(
            source_train=source,
            target_train=self.target_train.without_labels(),
            target_test=self.target_test,
            source_test=self.source_test,
        )


def _optional(cls, value):
    return None if value is None else cls.from_dict(value)


@dataclass
class RunReport:
    """Everything one pipeline run produced, serialisable as JSON."""

    config: Dict[str, Any]
    config_hash: str
    seed: int
    variant: str
    eval_path: str
    history: Optional[TrainingHistory] = None
    eval_pre: Optional[EvalResult] = None
    eval_post: Optional[EvalResult] = None
    source_eval: Optional[EvalResult] = None
    mmd_raw: Optional[MMDResult] = None
    mmd_gated: Optional[MMDResult] = None
    ttt: Optional[TTTReport] = None
    wall_clock: float = 0.0

    @property
    def final_eval(self) -> Optional[EvalResult]:
        return self.eval_post if self.eval_post is not None else self.eval_pre

    def to_dict(self) -> Dict[str, Any]:
        data = {}
        for f in fields(self):
            value = getattr(self, f.name)
            data[f.name] = value.to_dict() if hasattr(value, "to_dict") else value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunReport":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DataError(f"unknown run report fields: {sorted(unknown)}")
        return cls(
            config=data["config"],
            config_hash=data["config_hash"],
            seed=data["seed"],
            variant=data["variant"],
            eval_path=data["eval_path"],
            history=_optional(TrainingHistory, data.get("history")),
            eval_pre=_optional(EvalResult, data.get("eval_pre")),
            eval_post=_optional(EvalResult, data.get("eval_post")),
            source_eval=_optional(EvalResult, data.get("source_eval")),
            mmd_raw=_optional(MMDResult, data.get("mmd_raw")),
            mmd_gated=_optional(MMDResult, data.get("mmd_gated")),
            ttt=_optional(TTTReport, data.get("ttt")),
            wall_clock=data.get("wall_clock", 0.0),
        )

    def to_json(self, include_wall_clock: bool = True) -> str:
        data = self.to_dict()
        if not include_wall_clock:
            data.pop("wall_clock")
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        try:
            return cls.from_dict(json.loads(text))
        except (ValueError, KeyError, TypeError) as e:
            raise DataError(f"unreadable run report: {e}") from e

    def metric_row(self) -> Dict[str, Any]:
        """Flat per-seed metrics for ablation and sweep tables."""
        final = self.final_eval
        row: Dict[str, Any] = {"variant": self.variant, "seed": self.seed}
        if final is not None:
            row.update(
                accuracy=final.accuracy,
                f1_macro=final.f1_macro,
                f1_real=final.f1_real,
                f1_fake=final.f1_fake,
            )
        if self.eval_pre is not None:
            row["f1_macro_pre_ttt"] = self.eval_pre.f1_macro
        if self.mmd_raw is not None and self.mmd_gated is not None:
            row.update(mmd_raw=self.mmd_raw.statistic, mmd_gated=self.mmd_gated.statistic)
        if self.ttt is not None:
            row["ttt_retained"] = self.ttt.retained
        return row


def seed_list(text: str) -> List[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise ConfigError(f"seeds must be comma-separated integers, got {text!r}") from e
    if not seeds:
        raise ConfigError("at least one seed is required")
    return seeds
