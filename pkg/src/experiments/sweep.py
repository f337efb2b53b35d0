"""Single-hyperparameter sweeps over several seeds."""

from typing import Any, Dict, List, Optional, Sequence

from src.core.config import TrainConfig
from src.core.exceptions import ConfigError
from src.core.logging_config import get_logger
from src.experiments.ablation import summarize
from src.experiments.config import AblationSpec, DomainSplits
from src.experiments.runner import ExperimentRunner

logger = get_logger()

SWEEP_PARAMS = ("beta", "theta", "tau", "alpha1", "alpha2")


def parse_values(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"sweep values must be comma-separated numbers, got {text!r}") from e
    if not values:
        raise ConfigError("sweep needs at least one value")
    return values


def run_sweep(
    splits: DomainSplits,
    config: TrainConfig,
    param: str,
    values: Sequence[float],
    seeds: Sequence[int],
    threads: int = 1,
    runner: Optional[ExperimentRunner] = None,
) -> Dict[str, Any]:
    """One full run per (value, seed); each row carries the swept value."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep {param!r}; choose one of {SWEEP_PARAMS}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    runner = runner or ExperimentRunner()

    cells = [
        (config.replace(**{param: float(value), "seed": seed}), AblationSpec())
        for value in values
        for seed in seeds
    ]
    logger.info("Sweep started", param=param, values=len(values), seeds=len(seeds))

    rows = []
    for (cfg, _), report in zip(cells, runner.run_grid(splits, cells, threads)):
        row = report.metric_row()
        row["value"] = getattr(cfg, param)
        row["variant"] = f"{param}={row['value']:g}"
        rows.append(row)

    return {
        "config_hash": config.config_hash(),
        "param": param,
        "values": [float(v) for v in values],
        "seeds": list(seeds),
        "rows": rows,
        "summary": summarize(rows),
    }
