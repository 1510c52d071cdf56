from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from graphmatch.metrics import auc, average_ranks, mse_metric, precision_at_k, spearman_rho


class TestMse:
    def test_identical_vectors(self):
        assert mse_metric([0.1, 0.9], [0.1, 0.9]) == 0.0

    def test_constant_offset(self):
        assert mse_metric([0.2, 0.4, 0.6], [0.1, 0.3, 0.5]) == pytest.approx(0.01)

    def test_matches_direct_arithmetic(self):
        rng = np.random.default_rng(0)
        p, t = rng.random(40), rng.random(40)
        want = sum((a - b) ** 2 for a, b in zip(p, t)) / 40
        assert mse_metric(p, t) == pytest.approx(want)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mse_metric([1.0], [1.0, 2.0])


class TestSpearman:
    def test_identical_orderings(self):
        assert spearman_rho([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_exact_reversal(self):
        assert spearman_rho([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)

    def test_all_ties_truth_is_zero(self):
        assert spearman_rho([1, 2, 3], [5, 5, 5]) == 0.0

    def test_matches_scipy_with_ties(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            p = rng.integers(0, 6, 15).astype(float)
            t = rng.integers(0, 6, 15).astype(float)
            if len(set(p)) < 2 or len(set(t)) < 2:
                continue
            want = stats.spearmanr(p, t).statistic
            assert spearman_rho(p, t) == pytest.approx(want, abs=1e-12)

    @given(
        st.lists(st.floats(-10, 10), min_size=3, max_size=20),
        st.integers(0, 10_000),
    )
    @settings(max_examples=60, deadline=None)
    def test_invariant_under_monotone_transforms(self, values, seed):
        rng = np.random.default_rng(seed)
        other = rng.random(len(values))
        base = spearman_rho(values, other)
        squashed = spearman_rho([np.tanh(v) + 3 * v for v in values], other)
        assert squashed == pytest.approx(base, abs=1e-12)


class TestPrecisionAtK:
    def test_identical_rankings(self):
        pred = [0.9, 0.5, 0.3, 0.1]
        for k in range(1, 5):
            assert precision_at_k(pred, pred, k) == 1.0

    def test_disjoint_topk(self):
        assert precision_at_k([1, 2, 3, 4], [4, 3, 2, 1], 2) == 0.0

    def test_half_overlap(self):
        pred = list(range(20, 0, -1))  # predicted top-10 = indices 0..9
        truth = [0.0] * 20
        for i in list(range(5)) + list(range(10, 15)):  # true top-10: 0..4, 10..14
            truth[i] = 100.0 - i
        assert precision_at_k(pred, truth, 10) == 0.5

    def test_tie_break_by_candidate_id(self):
        # all scores tied: both rankings pick the k smallest ids
        assert precision_at_k([1, 1, 1], [2, 2, 2], 2, ["a", "b", "c"]) == 1.0

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            precision_at_k([1, 2], [1, 2], 3)


class TestAuc:
    def test_perfect_separation(self):
        assert auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_constant_scores_give_half(self):
        assert auc([0.5] * 10, [1, 0] * 5) == 0.5

    def test_matches_trapezoidal_roc_integration(self):
        rng = np.random.default_rng(7)
        scores = rng.random(20)
        labels = rng.integers(0, 2, 20)
        if labels.sum() in (0, 20):
            labels[0] = 1 - labels[0]
        # trapezoidal area under the ROC curve as a second computation
        thresholds = np.unique(scores)[::-1]
        pos, neg = labels.sum(), (1 - labels).sum()
        points = [(0.0, 0.0)]
        for th in thresholds:
            chosen = scores >= th
            points.append(
                ((chosen & (labels == 0)).sum() / neg, (chosen & (labels == 1)).sum() / pos)
            )
        points.append((1.0, 1.0))
        area = float(
            np.trapezoid([t for _, t in points], [f for f, _ in points])
        )
        assert auc(scores, labels) == pytest.approx(area, abs=1e-12)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(9)
        scores = rng.random(30)
        labels = rng.integers(0, 2, 30)
        if labels.sum() in (0, 30):
            labels[0] = 1 - labels[0]
        assert auc(scores, labels) == pytest.approx(
            auc(np.exp(4 * scores), labels), abs=1e-12
        )

    def test_rejects_single_class(self):
        with pytest.raises(ValueError):
            auc([0.5, 0.6], [1, 1])


class TestAverageRanks:
    def test_simple(self):
        assert list(average_ranks([10.0, 30.0, 20.0])) == [1.0, 3.0, 2.0]

    def test_ties_share_average(self):
        assert list(average_ranks([5.0, 5.0, 1.0])) == [2.5, 2.5, 1.0]
