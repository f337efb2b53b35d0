"""Paired significance testing between two multi-seed result files."""

from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from src.analysis.significance import significance_tier, wilcoxon_signed_rank
from src.core.exceptions import DataError

MIN_MATCHED_SEEDS = 5
COMPARED_METRICS = ("f1_macro", "accuracy")


def seed_metrics(document: Dict[str, Any], variant: Optional[str] = None) -> pd.DataFrame:
    """Per-seed rows from an ablation/sweep table or a single run report.

    Tables holding several variants need ``variant`` to pick one.
    """
    if "rows" in document:
        frame = pd.DataFrame(document["rows"])
    elif "seed" in document and "eval_pre" in document:
        final = document.get("eval_post") or document.get("eval_pre")
        if final is None:
            raise DataError("run report has no evaluation")
        frame = pd.DataFrame(
            [{"variant": document["variant"], "seed": document["seed"], **final}]
        )
    else:
        raise DataError("expected an ablation/sweep table or a run report")

    if variant is not None:
        frame = frame[frame["variant"] == variant]
        if frame.empty:
            raise DataError(f"variant {variant!r} not found")
    elif frame["variant"].nunique() > 1:
        raise DataError(f"several variants present {sorted(frame['variant'].unique())}; pick one")

    if frame["seed"].duplicated().any():
        raise DataError("duplicate seeds in result table")
    missing = [m for m in COMPARED_METRICS if m not in frame.columns]
    if missing:
        raise DataError(f"result table lacks metrics {missing}")
    return frame.set_index("seed").sort_index()


def compare(
    a: Dict[str, Any],
    b: Dict[str, Any],
    variant_a: Optional[str] = None,
    variant_b: Optional[str] = None,
) -> Dict[str, Any]:
    """Two-sided Wilcoxon signed-rank test per metric over seeds present in both."""
    left, right = seed_metrics(a, variant_a), seed_metrics(b, variant_b)
    if set(left.index) != set(right.index):
        raise DataError(f"seed mismatch: {sorted(left.index)} vs {sorted(right.index)}")
    if len(left) < MIN_MATCHED_SEEDS:
        raise DataError(f"need at least {MIN_MATCHED_SEEDS} matching seeds, got {len(left)}")

    results: Dict[str, Any] = {}
    for metric in COMPARED_METRICS:
        x = left[metric].to_numpy(dtype=np.float64)
        y = right[metric].to_numpy(dtype=np.float64)
        test = wilcoxon_signed_rank(x, y)
        results[metric] = {
            "mean_a": float(x.mean()),
            "mean_b": float(y.mean()),
            "statistic": test.statistic,
            "p_value": test.p_value,
            "significance": significance_tier(test.p_value),
        }
    return {"seeds": [int(s) for s in left.index], "metrics": results}
