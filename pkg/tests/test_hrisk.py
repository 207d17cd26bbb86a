import math

import numpy as np
import pytest

from epistab import hrisk, lti
from epistab.exceptions import InstabilityError, SearchError, ValidationError
from epistab.sweeps import b1_system


def scalar_analysis():
    # phi = 0.5, sigma = 1, H = 1, R = 1: P = 4/3, kappa = 1, int_sens = 4/3
    return lti.analyze_closed_loop([[0.5]], [[1.0]], [[0.0]], [[1.0]], [[1.0]])


def make_factors(margin, kappa, int_sens, ia):
    return hrisk.HRiskFactors(margin=margin, kappa=kappa,
                              int_sens=int_sens, ia=ia)


def unit_config():
    return hrisk.HRiskConfig(c_margin=1.0, c_kappa=1.0, c_int_sens=1.0,
                             c_ia=1.0)


class TestFactors:
    def test_scalar_closed_forms(self):
        f = hrisk.hrisk_factors(scalar_analysis())
        assert f.margin == pytest.approx(2.0, abs=1e-12)
        assert f.kappa == pytest.approx(1.0, abs=1e-12)
        assert f.int_sens == pytest.approx(4.0 / 3.0, abs=1e-12)
        assert f.ia == pytest.approx(4.0 / 3.0, abs=1e-12)

    def test_zero_loop_flags_kappa(self):
        sigma = np.array([[2.0, 0.0], [0.0, 3.0]])
        an = lti.analyze_closed_loop(
            np.zeros((2, 2)), [[1.0, 0.0]], np.zeros((2, 1)), sigma, [[1.0]]
        )
        f = hrisk.hrisk_factors(an)
        assert f.margin == pytest.approx(1.0)
        assert math.isnan(f.kappa)
        assert f.int_sens == pytest.approx(1.0)
        assert f.ia == pytest.approx(2.0)

    def test_unstable_rejected(self):
        an = scalar_analysis()
        bad = lti.ClosedLoopAnalysis(
            phi=an.phi, rho=1.0, kappa=an.kappa, int_sens=an.int_sens,
            P=an.P, S=an.S, ia=an.ia,
        )
        with pytest.raises(InstabilityError):
            hrisk.hrisk_factors(bad)


class TestCalibration:
    def test_reciprocal(self):
        cfg = hrisk.calibrate_constants(
            make_factors(2.0, 5.0, 4.0 / 3.0, 4.0 / 3.0)
        )
        assert cfg.c_margin == pytest.approx(0.5)
        assert cfg.c_kappa == pytest.approx(0.2)
        assert cfg.c_int_sens == pytest.approx(0.75)
        assert cfg.c_ia == pytest.approx(0.75)

    def test_self_normalization(self):
        an = scalar_analysis()
        cfg = hrisk.calibrate_constants(an)
        f = hrisk.hrisk_factors(an)
        assert hrisk.hrisk_index(f, cfg) == pytest.approx(1.0, abs=1e-12)

    def test_homogeneity(self):
        base = make_factors(2.0, 5.0, 1.0, 1.0)
        doubled = make_factors(4.0, 5.0, 1.0, 1.0)
        c1 = hrisk.calibrate_constants(base).c_margin
        c2 = hrisk.calibrate_constants(doubled).c_margin
        assert c2 == pytest.approx(c1 / 2.0)

    def test_undefined_factor_rejected(self):
        with pytest.raises(ValidationError):
            hrisk.calibrate_constants(make_factors(2.0, float("nan"), 1.0, 1.0))
        with pytest.raises(ValidationError):
            hrisk.calibrate_constants(make_factors(0.0, 1.0, 1.0, 1.0))


class TestIndex:
    def test_base_point_is_one(self):
        f = make_factors(2.0, 5.0, 3.0, 7.0)
        cfg = hrisk.calibrate_constants(f)
        assert hrisk.hrisk_index(f, cfg) == pytest.approx(1.0, abs=1e-12)

    def test_product_form(self):
        assert hrisk.hrisk_index(
            make_factors(2.0, 1.0, 1.0, 1.0), unit_config()
        ) == pytest.approx(2.0)

    def test_ablation_removes_factor(self):
        f = make_factors(2.0, 5.0, 1.0, 1.0)
        assert hrisk.hrisk_index(f, unit_config(), {"kappa"}) == pytest.approx(2.0)

    def test_ablate_all_rejected(self):
        with pytest.raises(ValidationError):
            hrisk.hrisk_index(
                make_factors(1, 1, 1, 1), unit_config(),
                set(hrisk.FACTOR_NAMES),
            )

    def test_unknown_factor_rejected(self):
        with pytest.raises(ValidationError):
            hrisk.hrisk_index(make_factors(1, 1, 1, 1), unit_config(),
                              {"nope"})

    def test_monotone_assembly(self):
        base = make_factors(2.0, 3.0, 1.5, 1.2)
        cfg = unit_config()
        ref = hrisk.hrisk_index(base, cfg)
        for name in hrisk.FACTOR_NAMES:
            bumped = dict(base.as_dict())
            bumped[name] *= 1.3
            assert hrisk.hrisk_index(make_factors(**bumped), cfg) > ref

    def test_ablation_consistency(self):
        f = make_factors(1.7, 4.2, 2.1, 0.9)
        cfg = hrisk.calibrate_constants(make_factors(1.1, 2.2, 3.3, 4.4))
        full = hrisk.hrisk_index(f, cfg)
        for name in hrisk.FACTOR_NAMES:
            part = hrisk.hrisk_index(f, cfg, {name})
            rebuilt = part * cfg.constant(name) * f.as_dict()[name]
            assert full == pytest.approx(rebuilt, rel=1e-12)

    def test_recalibration_invariance(self):
        f = make_factors(3.0, 2.0, 1.5, 2.5)
        cfg = hrisk.calibrate_constants(f)
        assert hrisk.hrisk_index(f, cfg) == pytest.approx(1.0, abs=1e-12)


class TestCritiqueGainSearch:
    def setup_method(self):
        self.sys = b1_system(0.03, 0.01)
        self.K0, _ = lti.dare_gain(self.sys)
        self.filt = lti.FilterSpec(
            Q=self.sys.Q, R=self.sys.R,
            gain_policy=lti.GainRay(K0=self.K0),
        )
        self.grid = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]

    def objective_oracle(self, lam):
        # brute force: evaluate tr(S) + lam * index at every stable point
        base = lti.analyze_closed_loop(
            self.sys.A, self.sys.H, self.K0, self.sys.Q, self.sys.R
        )
        cfg = hrisk.calibrate_constants(base)
        out = {}
        for alpha in self.grid:
            try:
                an = lti.analyze_closed_loop(
                    self.sys.A, self.sys.H, alpha * self.K0,
                    self.sys.Q, self.sys.R,
                )
            except InstabilityError:
                continue
            idx = hrisk.hrisk_index(hrisk.hrisk_factors(an), cfg)
            out[alpha] = float(np.trace(an.S)) + lam * idx
        return out

    def test_lambda_zero_returns_dare_base(self):
        alpha, K, _ = hrisk.critique_gain_search(
            self.sys, self.filt, 0.0, self.grid
        )
        oracle = self.objective_oracle(0.0)
        assert alpha == min(oracle, key=oracle.get)
        assert alpha == pytest.approx(1.0)
        np.testing.assert_allclose(K, self.K0)

    def test_large_lambda_minimizes_index(self):
        lam = 1e9
        alpha, _, _ = hrisk.critique_gain_search(
            self.sys, self.filt, lam, self.grid
        )
        oracle = self.objective_oracle(lam)
        assert alpha == min(oracle, key=oracle.get)

    def test_single_point_grid(self):
        alpha, _, _ = hrisk.critique_gain_search(
            self.sys, self.filt, 0.0, [0.75]
        )
        assert alpha == pytest.approx(0.75)

    def test_objective_monotone_in_lambda(self):
        obj1 = self.objective_oracle(0.5)
        obj2 = self.objective_oracle(2.0)
        for alpha in obj1:
            assert obj2[alpha] >= obj1[alpha]

    def test_all_unstable_raises(self):
        with pytest.raises(SearchError):
            hrisk.critique_gain_search(self.sys, self.filt, 0.0, [50.0, 80.0])

    def test_empty_grid_rejected(self):
        with pytest.raises(ValidationError):
            hrisk.critique_gain_search(self.sys, self.filt, 0.0, [])
