"""Paired Wilcoxon signed-rank test and significance tiers."""

from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from src.core.exceptions import ContractError

EXACT_MAX_N = 25


class WilcoxonResult(NamedTuple):
    statistic: float
    p_value: float


def _exact_two_sided(doubled_ranks: np.ndarray, t_plus_doubled: int) -> float:
    """P(|T+ - c| >= |t - c|) under random signs, counted over all 2^n assignments.

    Ranks are doubled so tied (half-integer) averages stay integral.
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled_ranks.astype(np.int64):
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    sums = np.arange(total + 1)
    observed = abs(2 * t_plus_doubled - total)
    extreme = np.abs(2 * sums - total) >= observed
    return float(min(1.0, counts[extreme].sum() / counts.sum()))


def _normal_two_sided(ranks: np.ndarray, t_plus: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - (tie_counts**3 - tie_counts).sum() / 48.0
    z = (t_plus - mean) / np.sqrt(variance)
    return float(min(1.0, 2.0 * stats.norm.sf(abs(z))))


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float]) -> WilcoxonResult:
    """Two-sided signed-rank test on paired samples.

    Zero differences are dropped and tied magnitudes share average ranks. The
    statistic is min(W+, W-). Up to 25 non-zero pairs the p-value is exact;
    above that a tie-corrected normal approximation is used.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ContractError(
            f"wilcoxon needs equal-length paired samples, got {x.shape} and {y.shape}"
        )

    d = x - y
    d = d[d != 0]
    if d.size == 0:
        return WilcoxonResult(statistic=0.0, p_value=1.0)

    ranks = stats.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())

    if d.size <= EXACT_MAX_N:
        p = _exact_two_sided(np.rint(2 * ranks), int(round(2 * w_plus)))
    else:
        p = _normal_two_sided(ranks, w_plus)
    return WilcoxonResult(statistic=min(w_plus, w_minus), p_value=p)


def significance_tier(p_value: float) -> str:
    if p_value < 0.001:
        return "***"
    if p_value < 0.01:
        return "**"
    if p_value < 0.05:
        return "*"
    return "ns"
