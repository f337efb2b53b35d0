"""Tests for the paired Wilcoxon signed-rank test."""

import itertools

import numpy as np
import pytest
from scipy.stats import rankdata

from src.analysis.significance import significance_tier, wilcoxon_signed_rank
from src.core.exceptions import ContractError


def _brute_force_p(x, y):
    """Two-sided p-value by enumerating every sign assignment."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    d = d[d != 0]
    ranks = rankdata(np.abs(d))
    centre = ranks.sum() / 2
    observed = abs(ranks[d > 0].sum() - centre)
    hits = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        t_plus = ranks[np.array(signs, dtype=bool)].sum()
        hits += abs(t_plus - centre) >= observed - 1e-9
    return hits / 2 ** len(d)


class TestWilcoxon:
    """Test the signed-rank test."""

    def test_no_differences(self):
        """Test identical samples give p = 1."""
        assert wilcoxon_signed_rank([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]).p_value == 1.0

    def test_all_positive(self):
        """Test eight wins with distinct gaps give W = 0 and p = 2/256."""
        x = np.arange(1, 9) * 0.1 + 1.0
        y = np.ones(8)
        result = wilcoxon_signed_rank(x, y)
        assert result.statistic == 0.0
        assert result.p_value == pytest.approx(2 / 256)

    def test_swap_symmetric(self, rng):
        """Test swapping x and y leaves the result unchanged."""
        x, y = rng.standard_normal(10), rng.standard_normal(10)
        assert wilcoxon_signed_rank(x, y) == wilcoxon_signed_rank(y, x)

    @pytest.mark.parametrize("n", [5, 7, 9, 12])
    @pytest.mark.parametrize("seed", range(4))
    def test_matches_enumeration(self, n, seed):
        """Test exact p-values, with ties and zeros, against full enumeration."""
        rng = np.random.default_rng(seed)
        x = rng.integers(0, 6, size=n).astype(float)
        y = rng.integers(0, 6, size=n).astype(float)
        if np.all(x == y):
            y[0] += 1
        assert wilcoxon_signed_rank(x, y).p_value == pytest.approx(_brute_force_p(x, y))

    def test_zero_differences_dropped(self):
        """Test zero differences do not change the result."""
        x, y = [3.0, 1.0, 2.5, 4.0, 5.0], [1.0, 1.0, 2.0, 3.5, 4.0]
        assert wilcoxon_signed_rank(x, y) == wilcoxon_signed_rank(
            [3.0, 2.5, 4.0, 5.0], [1.0, 2.0, 3.5, 4.0]
        )

    def test_normal_approximation(self, rng):
        """Test large samples use a sensible approximation."""
        x = rng.standard_normal(40)
        strong = wilcoxon_signed_rank(x + 5.0, x - rng.uniform(0.1, 1.0, 40))
        assert strong.p_value < 1e-5
        null = wilcoxon_signed_rank(x, x + rng.standard_normal(40) * 1e-3)
        assert 0.0 < null.p_value <= 1.0

    def test_unequal_lengths(self):
        """Test unpaired inputs raise ContractError."""
        with pytest.raises(ContractError):
            wilcoxon_signed_rank([1.0, 2.0], [1.0])


class TestSignificanceTier:
    """Test significance markers."""

    @pytest.mark.parametrize(
        "p, tier", [(0.0005, "***"), (0.005, "**"), (0.03, "*"), (0.05, "ns"), (0.7, "ns")]
    )
    def test_tiers(self, p, tier):
        """Test thresholds at 0.001, 0.01 and 0.05."""
        assert significance_tier(p) == tier
