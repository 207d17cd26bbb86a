import math

import numpy as np
import pytest

from epistab import stats
from epistab.exceptions import DegenerateDataError, ValidationError


def ps(x, y):
    return stats.PairedSample(np.asarray(x, float), np.asarray(y, float))


class TestPearson:
    def test_exact_linearity(self):
        x = np.arange(10.0)
        assert stats.pearson(ps(x, 3 * x + 2)) == pytest.approx(1.0)

    def test_anticorrelation(self):
        x = np.arange(5.0)
        assert stats.pearson(ps(x, -x)) == pytest.approx(-1.0)

    def test_orthogonal_hand_case(self):
        assert stats.pearson(ps([-1, 0, 1], [1, -2, 1])) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateDataError):
            stats.pearson(ps([1, 1, 1], [1, 2, 3]))

    def test_affine_invariance(self):
        rng = np.random.default_rng(0)
        x, y = rng.standard_normal(20), rng.standard_normal(20)
        base = stats.pearson(ps(x, y))
        assert stats.pearson(ps(2 * x + 1, 3 * y - 5)) == pytest.approx(base)
        assert stats.pearson(ps(-2 * x, y)) == pytest.approx(-base)


class TestSpearman:
    def test_monotone(self):
        x = np.arange(1.0, 9.0)
        assert stats.spearman(ps(x, np.exp(x))) == pytest.approx(1.0)

    def test_reversed(self):
        x = np.arange(1.0, 9.0)
        assert stats.spearman(ps(x, -(x**3))) == pytest.approx(-1.0)

    def test_midrank_ties_hand_case(self):
        # ranks of x: (1.5, 1.5, 3); Pearson against (1, 2, 3) = sqrt(3)/2
        assert stats.spearman(ps([1, 1, 2], [1, 2, 3])) == pytest.approx(
            math.sqrt(3.0) / 2.0, abs=1e-12
        )

    def test_all_equal_rejected(self):
        with pytest.raises(DegenerateDataError):
            stats.spearman(ps([2, 2, 2], [1, 2, 3]))

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(15)
        y = rng.standard_normal(15)
        base = stats.spearman(ps(x, y))
        assert stats.spearman(ps(np.exp(x), y**3)) == pytest.approx(base)
        assert stats.spearman(ps(2 * x + 3, y)) == pytest.approx(base)


def brute_force_theil_sen(x, y):
    slopes = []
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            if x[j] != x[i]:
                slopes.append((y[j] - y[i]) / (x[j] - x[i]))
    slopes.sort()
    m = len(slopes)
    if m % 2:
        return slopes[m // 2]
    return 0.5 * (slopes[m // 2 - 1] + slopes[m // 2])


class TestTheilSen:
    def test_exact_line(self):
        x = np.arange(8.0)
        assert stats.theil_sen(ps(x, 2 * x + 1)) == pytest.approx(2.0)

    def test_single_gross_outlier(self):
        x = np.arange(9.0)
        y = x.copy()
        y[4] = 1e6
        assert stats.theil_sen(ps(x, y)) == pytest.approx(
            brute_force_theil_sen(x, y)
        )
        assert stats.theil_sen(ps(x, y)) == pytest.approx(1.0)

    def test_two_points(self):
        assert stats.theil_sen(ps([0, 2], [1, 5])) == pytest.approx(2.0)

    def test_all_x_equal_rejected(self):
        with pytest.raises(DegenerateDataError):
            stats.theil_sen(ps([3, 3, 3], [1, 2, 3]))

    @pytest.mark.parametrize("n", [9, 11, 13, 15])
    def test_breakdown_with_balanced_corruption(self, n):
        # floor((n-2)/2) y-values replaced by a huge constant at positions
        # chosen so corrupted-vs-clean slopes split evenly around the line
        k = (n - 2) // 2
        x = np.arange(1.0, n + 1.0)
        y = 2.0 * x
        positions = _balanced_positions(n, k)
        y[positions] = 1e9
        assert stats.theil_sen(ps(x, y)) == pytest.approx(2.0, abs=1e-12)
        assert brute_force_theil_sen(x, y) == pytest.approx(2.0, abs=1e-12)

    def test_intercept_on_exact_line(self):
        x = np.arange(6.0)
        sample = ps(x, 2 * x + 1)
        assert stats.theil_sen_intercept(sample) == pytest.approx(1.0)


def _balanced_positions(n, k):
    """Pick k corruption indices whose left/right clean counts balance."""
    best, best_gap = None, None
    from itertools import combinations

    for combo in combinations(range(n), k):
        clean = sorted(set(range(n)) - set(combo))
        left = sum(sum(1 for c in clean if c < j) for j in combo)
        right = sum(sum(1 for c in clean if c > j) for j in combo)
        gap = abs(left - right)
        if best_gap is None or gap < best_gap:
            best, best_gap = combo, gap
        if gap == 0:
            break
    return list(best)


class TestOlsFit:
    def test_exact_line(self):
        x = np.arange(5.0)
        slope, intercept = stats.ols_fit(ps(x, 2 * x + 1))
        assert slope == pytest.approx(2.0)
        assert intercept == pytest.approx(1.0)


class TestBcaCi:
    def test_all_equal_zero_width_flagged(self):
        est = stats.bca_ci(np.full(10, 3.5), "mean", seed=0)
        assert est.lo == est.hi == est.point == 3.5
        assert est.flag == "degenerate"

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(2)
        data = rng.standard_normal(40)
        a = stats.bca_ci(data, "mean", seed=7)
        b = stats.bca_ci(data, "mean", seed=7)
        assert (a.lo, a.hi, a.point) == (b.lo, b.hi, b.point)

    def test_symmetric_data_close_to_percentile(self):
        # near-zero bias correction on a large symmetric sample
        rng = np.random.default_rng(3)
        data = rng.standard_normal(10_000)
        est = stats.bca_ci(data, "mean", n_boot=1000, seed=5)
        # percentile oracle from the documented resampling contract
        idx_rng = np.random.Generator(np.random.Philox(key=5))
        idx = idx_rng.integers(0, data.size, size=(1000, data.size))
        reps = data[idx].mean(axis=1)
        lo, hi = np.quantile(reps, [0.025, 0.975])
        sd = reps.std()
        assert abs(est.lo - lo) < 0.2 * sd
        assert abs(est.hi - hi) < 0.2 * sd

    def test_paired_statistic(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(30)
        y = 2 * x + rng.standard_normal(30) * 0.1
        est = stats.bca_ci(ps(x, y), "pearson", seed=11)
        assert 0.9 < est.lo <= est.point <= est.hi <= 1.0

    def test_interval_estimate_ordering(self):
        rng = np.random.default_rng(5)
        data = rng.exponential(size=60)
        est = stats.bca_ci(data, "median", seed=3)
        assert est.lo <= est.point <= est.hi or est.flag is not None

    def test_small_n_rejected(self):
        with pytest.raises(ValidationError):
            stats.bca_ci(np.ones(2), "mean", seed=0)

    def test_low_n_boot_rejected(self):
        with pytest.raises(ValidationError):
            stats.bca_ci(np.arange(10.0), "mean", n_boot=50, seed=0)

    def test_unknown_label_rejected(self):
        with pytest.raises(ValidationError):
            stats.bca_ci(np.arange(10.0), "mode", seed=0)


class TestBhFdr:
    def test_all_zero_rejected_everywhere(self):
        reject, _ = stats.bh_fdr([0.0, 0.0, 0.0], q=0.05)
        assert reject.all()

    def test_all_one_rejected_nowhere(self):
        reject, adjusted = stats.bh_fdr([1.0, 1.0], q=0.05)
        assert not reject.any()
        assert np.all(adjusted == 1.0)

    def test_hand_case(self):
        # thresholds i*q/m = .0125, .025, .0375, .05
        reject, _ = stats.bh_fdr([0.01, 0.02, 0.03, 0.5], q=0.05)
        assert reject.tolist() == [True, True, True, False]

    def test_rejections_are_prefix_of_sorted_order(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            p = rng.random(12)
            reject, adjusted = stats.bh_fdr(p, q=0.1)
            order = np.argsort(p, kind="stable")
            flags = reject[order]
            assert not np.any(np.diff(flags.astype(int)) > 0)
            assert np.all(np.diff(adjusted[order]) >= -1e-15)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            stats.bh_fdr([0.5, 1.5], q=0.05)


class TestEffectSizes:
    def test_cliffs_delta_dominance(self):
        assert stats.cliffs_delta([5, 6, 7], [1, 2, 3]) == pytest.approx(1.0)

    def test_cliffs_delta_identical_multisets(self):
        assert stats.cliffs_delta([1, 2, 2, 3], [3, 2, 1, 2]) == pytest.approx(0.0)

    def test_cliffs_delta_hand_case(self):
        assert stats.cliffs_delta([1, 2], [1, 3]) == pytest.approx(-0.25)

    def test_hedges_g_equal_means(self):
        assert stats.hedges_g([1, 2, 3], [3, 2, 1]) == pytest.approx(0.0)

    def test_hedges_g_shift_closed_form(self):
        rng = np.random.default_rng(7)
        b = rng.standard_normal(40)
        shift = 1.7
        a = b + shift
        sd = math.sqrt(
            ((a.size - 1) * a.var(ddof=1) + (b.size - 1) * b.var(ddof=1))
            / (a.size + b.size - 2)
        )
        j = 1.0 - 3.0 / (4.0 * (a.size + b.size) - 9.0)
        assert stats.hedges_g(a, b) == pytest.approx(shift / sd * j)

    def test_correction_approaches_one(self):
        a = np.arange(100.0)
        b = np.arange(100.0) + 1.0
        j = 1.0 - 3.0 / (4.0 * 200 - 9.0)
        assert j > 0.996
        d = (a.mean() - b.mean()) / math.sqrt(
            (99 * a.var(ddof=1) + 99 * b.var(ddof=1)) / 198
        )
        assert stats.hedges_g(a, b) == pytest.approx(d * j)

    def test_zero_pooled_variance_rejected(self):
        with pytest.raises(DegenerateDataError):
            stats.hedges_g([2, 2, 2], [2, 2, 2])
