import numpy as np
import pytest

from epistab import hrisk, lti, sweeps
from epistab.exceptions import ValidationError

FAST = {"T": "1500", "seeds": "0,1", "burn_in": "100",
        "eps_grid": "1.0,0.5,0.25,0.12,0.05,0.02"}


@pytest.fixture(scope="module")
def b2_result():
    cfg = sweeps.resolve_config("B2_epsilon", FAST)
    spec = sweeps.build_spec(cfg)
    return spec, sweeps.run_sweep(spec)


class TestConfig:
    def test_defaults_match_reported_setup(self):
        cfg = sweeps.resolve_config("B2_epsilon")
        assert cfg.sigma_w == 0.03 and cfg.sigma_v == 0.01
        assert cfg.q_filt_scale == 0.12 and cfg.r_filt_scale == 0.30
        assert cfg.a12 == 0.60 and cfg.T == 10000
        assert cfg.eps_grid == sweeps.B2_EPS_GRID
        assert cfg.gain_policy == "fixed_ref"
        assert cfg.quantile == 0.99

    def test_b1_defaults(self):
        cfg = sweeps.resolve_config("B1_alpha_ray")
        assert cfg.gain_policy == "gain_ray"
        assert cfg.alpha_points == 12
        assert cfg.alpha_max_frac == 0.98

    def test_overrides_parse(self):
        cfg = sweeps.resolve_config(
            "B2_epsilon",
            {"a12": "0.75", "seeds": "3,4", "eps_grid": "1.0,0.5"},
        )
        assert cfg.a12 == 0.75
        assert cfg.seeds == (3, 4)
        assert cfg.eps_grid == (1.0, 0.5)

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError):
            sweeps.resolve_config("B2_epsilon", {"sigma_q": "1"})

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError):
            sweeps.resolve_config("B3")


class TestB1Grid:
    def test_grid_brackets_instability(self):
        cfg = sweeps.resolve_config("B1_alpha_ray")
        spec = sweeps.build_spec(cfg)
        sys = spec.sys_template
        K0 = spec.filt.gain_policy.K0
        alpha_crit = sweeps.find_alpha_crit(sys, K0)
        assert len(spec.grid) == 12
        assert spec.grid[0] == pytest.approx(1.0)
        assert spec.grid[-1] == pytest.approx(0.98 * alpha_crit, rel=1e-9)
        # bisection brackets the boundary
        rho_below = max(abs(np.linalg.eigvals(
            lti.closed_loop(sys.A, sys.H, (alpha_crit * (1 - 1e-8)) * K0)
        )))
        rho_at = max(abs(np.linalg.eigvals(
            lti.closed_loop(sys.A, sys.H, alpha_crit * K0)
        )))
        assert rho_below < 1.0 <= rho_at + 1e-9

    def test_rho_nondecreasing_and_index_grows_toward_boundary(self):
        cfg = sweeps.resolve_config(
            "B1_alpha_ray", {"T": "400", "seeds": "0"}
        )
        spec = sweeps.build_spec(cfg)
        result = sweeps.run_sweep(spec)
        by_param = {}
        for row in result.rows:
            by_param[row.param_value] = row
        params = sorted(by_param)
        rhos = [by_param[p].rho for p in params]
        hr = [by_param[p].hrisk for p in params]
        assert all(b >= a - 1e-12 for a, b in zip(rhos, rhos[1:]))
        # unit scaling: the ray base point is the calibration base point
        assert hr[0] == pytest.approx(1.0, abs=1e-9)
        # the index rises strictly on the final approach to instability;
        # mid-ray it is non-monotone because det(Phi(alpha)) crosses zero
        assert hr[-1] > hr[0]
        tail = hr[-4:]
        assert all(b > a for a, b in zip(tail, tail[1:]))


class TestB2Sweep:
    def test_all_default_points_stable(self, b2_result):
        spec, result = b2_result
        assert result.n_unstable == 0
        assert len(result.rows) == len(spec.grid) * len(spec.seeds)
        assert all(r.stable_flag for r in result.rows)

    def test_structural_metrics_shared_across_seeds(self, b2_result):
        _, result = b2_result
        by_param = {}
        for row in result.rows:
            by_param.setdefault(row.param_value, set()).add(
                (row.rho, row.kappa, row.hrisk)
            )
        assert all(len(v) == 1 for v in by_param.values())

    def test_headline_direction_on_reduced_grid(self, b2_result):
        _, result = b2_result
        rows = {r["statistic"]: r for r in result.summaries
                if r["pair_label"] == "hrisk_vs_nis_mean"}
        assert rows["spearman"]["point"] == pytest.approx(1.0)
        assert rows["spearman"]["ci_lo"] > 0.0
        assert rows["theil_sen"]["point"] > 0.0

    def test_kappa_nondecreasing_in_tight_coupling_range(self, b2_result):
        # kappa dips between eps = 1.0 and 0.5 (the frozen gain is optimal
        # at the reference point); below 0.5 it grows monotonically
        _, result = b2_result
        by_param = {r.param_value: r.kappa for r in result.rows}
        params = sorted(p for p in by_param if p <= 0.5)
        kappas = [by_param[p] for p in params]  # ascending eps
        assert all(a >= b - 1e-12 for a, b in zip(kappas, kappas[1:]))

    def test_summary_has_per_seed_rows(self, b2_result):
        _, result = b2_result
        labels = {r["pair_label"] for r in result.summaries}
        assert "hrisk_vs_nis_mean@seed0" in labels
        assert "log10_hrisk_vs_nis_mean" in labels

    def test_single_point_grid_degenerate(self):
        cfg = sweeps.resolve_config(
            "B2_epsilon", {"eps_grid": "0.5", "T": "300", "seeds": "0"}
        )
        result = sweeps.run_sweep(sweeps.build_spec(cfg))
        assert all(
            row["method"].startswith("degenerate")
            for row in result.summaries
            if row["statistic"] in ("pearson", "spearman", "theil_sen")
        )

    def test_unstable_points_flagged_and_excluded(self):
        cfg = sweeps.resolve_config(
            "B1_alpha_ray", {"T": "300", "seeds": "0"}
        )
        spec = sweeps.build_spec(cfg)
        sys = spec.sys_template
        K0 = spec.filt.gain_policy.K0
        alpha_crit = sweeps.find_alpha_crit(sys, K0)
        bad_spec = sweeps.SweepSpec(
            kind=spec.kind, grid=(1.0, 1.2, 1.05 * alpha_crit),
            sys_template=sys, filt=spec.filt, seeds=(0,), T=300,
            config=spec.config,
        )
        result = sweeps.run_sweep(bad_spec)
        assert result.n_unstable == 1
        flagged = [r for r in result.rows if not r.stable_flag]
        assert len(flagged) == 1
        assert np.isnan(flagged[0].hrisk)
        assert np.isnan(flagged[0].nis_mean)
        assert flagged[0].rho >= 1.0
        # correlations use only the two stable points -> degenerate (n < 3)
        for row in result.summaries:
            if row["statistic"] in ("pearson", "spearman", "theil_sen"):
                assert row["n"] == 2


class TestAblation:
    def test_empty_ablation_reproduces_sweep_summary(self):
        cfg = sweeps.resolve_config("B2_epsilon", FAST)
        spec = sweeps.build_spec(
            cfg, ablations=(frozenset(), frozenset({"kappa"}))
        )
        result, by_label = sweeps.run_ablation(spec)
        assert set(by_label) == {"hrisk", "hrisk_no_kappa"}
        plain = [
            {**row} for row in result.summaries
        ]
        assert by_label["hrisk"] == plain

    def test_ablated_index_matches_factor_removal(self):
        cfg = sweeps.resolve_config("B2_epsilon", FAST)
        spec = sweeps.build_spec(cfg, ablations=sweeps.SINGLE_ABLATIONS)
        result, by_label = sweeps.run_ablation(spec)
        assert len(by_label) == 5
        factors = result.point_factors[1.0]
        full = hrisk.hrisk_index(factors, result.base_config)
        for name in hrisk.FACTOR_NAMES:
            part = hrisk.hrisk_index(factors, result.base_config, {name})
            scale = result.base_config.constant(name) * factors.as_dict()[name]
            assert full == pytest.approx(part * scale, rel=1e-12)


class TestMetadata:
    def test_metadata_block(self, b2_result):
        spec, result = b2_result
        meta = sweeps.results_metadata(spec, result)
        assert meta["prng"] == "philox4x64"
        assert meta["config.kind"] == "B2_epsilon"
        assert meta["n_unstable_excluded"] == 0
        assert "c_margin" in meta and "c_ia" in meta
        assert meta["believed_s"] == "dare-under-beliefs"
