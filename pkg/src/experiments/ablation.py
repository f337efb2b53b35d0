"""Multi-seed ablation tables."""

from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from src.core.config import TrainConfig
from src.core.exceptions import ConfigError
from src.core.logging_config import get_logger
from src.experiments.config import AblationSpec, DomainSplits, RunReport
from src.experiments.runner import ExperimentRunner

logger = get_logger()

SUMMARY_METRICS = ("accuracy", "f1_macro", "f1_real", "f1_fake", "mmd_raw", "mmd_gated")


def parse_variants(text: str) -> List[AblationSpec]:
    """Comma-separated variants, e.g. ``full,no_ttt,no_diva+no_dcc+no_ttt,drop:1``."""
    variants = [AblationSpec.parse(token) for token in text.split(",") if token.strip()]
    if not variants:
        raise ConfigError("at least one variant is required")
    names = [v.name for v in variants]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate variants in {names}")
    return variants


def summarize(rows: List[Dict[str, Any]], key: str = "variant") -> Dict[str, Dict[str, float]]:
    """Mean and standard deviation of every metric per ``key`` value, in first-seen order."""
    frame = pd.DataFrame(rows)
    metrics = [m for m in SUMMARY_METRICS if m in frame.columns]
    grouped = frame.groupby(key, sort=False)[metrics]
    means, stds = grouped.mean(), grouped.std(ddof=0)
    summary: Dict[str, Dict[str, float]] = {}
    for name in means.index:
        entry = {"runs": int((frame[key] == name).sum())}
        for metric in metrics:
            entry[f"{metric}_mean"] = float(means.loc[name, metric])
            entry[f"{metric}_std"] = float(stds.loc[name, metric])
        summary[str(name)] = entry
    return summary


def run_ablation(
    splits: DomainSplits,
    config: TrainConfig,
    variants: Sequence[AblationSpec],
    seeds: Sequence[int],
    threads: int = 1,
    runner: Optional[ExperimentRunner] = None,
) -> Dict[str, Any]:
    """One full pipeline run per (variant, seed); rows are variant-major."""
    runner = runner or ExperimentRunner()
    cells = [(config.replace(seed=seed), variant) for variant in variants for seed in seeds]
    logger.info("Ablation started", variants=len(variants), seeds=len(seeds), threads=threads)

    reports: List[RunReport] = runner.run_grid(splits, cells, threads)
    rows = [r.metric_row() for r in reports]
    return {
        "config_hash": config.config_hash(),
        "seeds": list(seeds),
        "variants": [v.name for v in variants],
        "rows": rows,
        "summary": summarize(rows),
    }
