import math

import numpy as np
import pytest

from epistab import calibration as cal
from epistab.exceptions import ValidationError


def rec(probs, label):
    return cal.PredictionRecord(probs=tuple(probs), label=label)


def random_records(rng, n, k=3):
    out = []
    for _ in range(n):
        p = rng.random(k) + 0.05
        p = p / p.sum()
        out.append(rec(p, int(rng.integers(0, k))))
    return out


class TestRecordValidation:
    def test_probs_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            rec((0.5, 0.4), 0)

    def test_label_in_range(self):
        with pytest.raises(ValidationError):
            rec((0.5, 0.5), 2)

    def test_needs_two_classes(self):
        with pytest.raises(ValidationError):
            rec((1.0,), 0)

    def test_binary_record(self):
        r = cal.binary_record(0.8, correct=True)
        assert r.probs[0] == 0.8
        assert r.probs[1] == pytest.approx(0.2)
        assert r.label == 0
        assert cal.binary_record(0.8, correct=False).label == 1


class TestEce:
    def test_zero_on_constructed_calibrated_set(self):
        # ten items at confidence 0.8, eight of them correct
        records = [cal.binary_record(0.8, correct=i < 8) for i in range(10)]
        for mode in ("equal_width", "equal_frequency"):
            assert cal.ece(records, cal.BinScheme(mode=mode, B=1)) == (
                pytest.approx(0.0, abs=1e-12)
            )

    def test_two_record_hand_case(self):
        records = [rec((0.9, 0.1), 0), rec((0.6, 0.4), 1)]
        # single bin: conf = 0.75, acc = 0.5
        for mode in ("equal_width", "equal_frequency"):
            assert cal.ece(records, cal.BinScheme(mode=mode, B=1)) == (
                pytest.approx(0.25, abs=1e-12)
            )

    def test_identical_predictions_make_modes_agree(self):
        records = [rec((0.7, 0.3), i % 2) for i in range(9)]
        ew = cal.ece(records, cal.BinScheme(mode="equal_width", B=10))
        ef = cal.ece(records, cal.BinScheme(mode="equal_frequency", B=1))
        assert ew == pytest.approx(ef, abs=1e-12)

    def test_equal_frequency_bin_sizes(self):
        rng = np.random.default_rng(0)
        conf = rng.uniform(0.5, 1.0, size=23)
        scheme = cal.BinScheme(mode="equal_frequency", B=5)
        sizes = [len(m) for m in cal._bins(conf, scheme)]
        assert sorted(sizes) == [4, 4, 5, 5, 5]

    def test_equal_frequency_needs_enough_records(self):
        records = [cal.binary_record(0.9, True)] * 3
        with pytest.raises(ValidationError):
            cal.ece(records, cal.BinScheme(mode="equal_frequency", B=10))

    def test_bounded_by_one(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            records = random_records(rng, 30)
            v = cal.ece(records, cal.BinScheme())
            assert 0.0 <= v <= 1.0

    def test_debias_never_exceeds_plugin(self):
        rng = np.random.default_rng(2)
        worse = 0
        for _ in range(200):
            n = int(rng.integers(20, 60))
            p = rng.uniform(0.55, 0.95, size=n)
            correct = rng.random(n) < p  # calibrated by construction
            records = [
                cal.binary_record(pi, bool(ci)) for pi, ci in zip(p, correct)
            ]
            plain = cal.ece(records, cal.BinScheme(B=5))
            debiased = cal.ece(records, cal.BinScheme(B=5, debias=True))
            if debiased > plain + 1e-12:
                worse += 1
        assert worse == 0


class TestMce:
    def test_zero_on_calibrated_set(self):
        records = [cal.binary_record(0.8, correct=i < 8) for i in range(10)]
        assert cal.mce(records, cal.BinScheme(B=1)) == pytest.approx(0.0)

    def test_single_bin_equals_ece(self):
        records = [rec((0.9, 0.1), 0), rec((0.6, 0.4), 1)]
        scheme = cal.BinScheme(B=1)
        assert cal.mce(records, scheme) == pytest.approx(0.25)

    def test_dominates_ece(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            records = random_records(rng, 25)
            scheme = cal.BinScheme(B=5)
            assert cal.mce(records, scheme) >= cal.ece(records, scheme) - 1e-12


class TestBrier:
    def test_perfect_prediction(self):
        assert cal.brier([rec((1.0, 0.0), 0)]) == pytest.approx(0.0)

    def test_certain_wrong_prediction_maxes_at_two(self):
        assert cal.brier([rec((1.0, 0.0), 1)]) == pytest.approx(2.0)

    def test_uniform_binary(self):
        assert cal.brier([rec((0.5, 0.5), 1)]) == pytest.approx(0.5)

    def test_range(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            v = cal.brier(random_records(rng, 20))
            assert 0.0 <= v <= 2.0


class TestLogLoss:
    def test_certain_correct(self):
        assert cal.log_loss([rec((1.0, 0.0), 0)]) == pytest.approx(0.0)

    def test_one_over_e(self):
        p = 1.0 / math.e
        assert cal.log_loss([rec((p, 1.0 - p), 0)]) == pytest.approx(1.0)

    def test_clipping(self):
        v = cal.log_loss([rec((0.0, 1.0), 0)])
        assert v == pytest.approx(-math.log(1e-15))

    def test_all_zero_on_perfect_records(self):
        records = [rec((1.0, 0.0), 0), rec((0.0, 1.0), 1)]
        assert cal.ece(records, cal.BinScheme(B=1)) == pytest.approx(0.0)
        assert cal.mce(records, cal.BinScheme(B=1)) == pytest.approx(0.0)
        assert cal.brier(records) == pytest.approx(0.0)
        assert cal.log_loss(records) == pytest.approx(0.0)
