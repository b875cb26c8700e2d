import numpy as np
import pytest
from hypothesis import given, strategies as st

from harmconj.bounds import (
    ETA_SWEEP,
    DeltaNormProbe,
    FamilyKind,
    Lemma2Config,
    OperatorKind,
    TestFamily,
    degree_drift,
    delta_norm_probe,
    estimate_operator_constant,
    lemma2_coefficient,
    lemma2_margin,
    lemma2_sampling_slack,
    operator_ratios,
    random_lemma2_config,
    theorem_pipeline_report,
)
from harmconj.quadrature import DEFAULT_GRID, NormSpec, PolarGrid
from harmconj.series import PowerSeries
from harmconj.weights import DivergenceError, WeightSpec

SMALL_GRID = PolarGrid.gauss(64, 128)


def moment_norm_sq(coeffs):
    """``int |Re f|^2 dA`` for ``f(0) = 0`` from radial moments.

    On the circle of radius r the terms ``a_n r^n e^{int}`` are orthogonal, and
    Re/Im each carry half of ``|a_n|^2 r^{2n}``; ``2 pi int_0^1 r^{2n+1} dr = pi/(n+1)``.
    """
    c = np.asarray(coeffs)
    n = np.arange(c.size)
    return float(np.sum(np.abs(c[1:]) ** 2 * 0.5 * np.pi / (n[1:] + 1)))


class TestLocalDerivativeBound:
    def test_coefficient(self):
        assert lemma2_coefficient(0.25) == pytest.approx(4 / 3)

    def test_constant_function(self):
        cfg = Lemma2Config(0.1, 0.5, 0.5, 0.1, 0.25j)
        assert lemma2_margin(PowerSeries([2.0]), cfg) >= 0.0

    def test_hand_example(self):
        cfg = Lemma2Config(0.0, 0.5, 0.5, 0.0, 0.25)
        # LHS 0.5; RHS 0.25/0.5 + (5/1.5) * 0.5 * 1
        assert lemma2_margin(PowerSeries([0, 1]), cfg) == pytest.approx(0.5 + 5 / 3 - 0.5, rel=1e-14)

    @pytest.mark.parametrize(
        "kw",
        [
            dict(eta=1.0),
            dict(sigma=0.0),
            dict(a=0.6),
            dict(h=0.3),
            dict(z=0.26),
        ],
    )
    def test_config_validation(self, kw):
        args = dict(a=0.0, sigma=0.5, eta=0.5, z=0.0, h=0.25)
        args.update(kw)
        with pytest.raises(ValueError):
            Lemma2Config(**args)

    @given(st.integers(0, 2**32), st.sampled_from(ETA_SWEEP))
    def test_random_configs_valid(self, seed, eta):
        cfg = random_lemma2_config(np.random.default_rng(seed), eta)
        assert abs(cfg.a) + cfg.sigma < 1.0
        assert abs(cfg.z - cfg.a) < abs(cfg.h)

    def test_random_sweep(self, rng):
        worst = np.inf
        for i in range(500):
            deg = int(rng.integers(0, 11))
            f = PowerSeries(rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1))
            cfg = random_lemma2_config(rng, ETA_SWEEP[i % 4])
            worst = min(worst, lemma2_margin(f, cfg) + lemma2_sampling_slack(f, cfg, 4096))
        assert worst >= -1e-9

    def test_sampling_slack_bounds_undersampling(self, rng):
        f = PowerSeries(rng.standard_normal(9) + 1j * rng.standard_normal(9))
        cfg = random_lemma2_config(rng, 0.25)
        coarse = lemma2_margin(f, cfg, 16)
        fine = lemma2_margin(f, cfg, 1 << 16)
        assert fine - coarse <= lemma2_sampling_slack(f, cfg, 16) + 1e-12


class TestFamilies:
    def test_reproducible(self):
        a = TestFamily(seed=3).members()
        b = TestFamily(seed=3).members()
        assert a == b
        assert a != TestFamily(seed=4).members()

    def test_recentred(self):
        for kind in FamilyKind:
            for f in TestFamily(kind, count=5).members():
                assert f.coeffs[0] == 0

    def test_degree_nested(self):
        low = TestFamily(max_degree=8).members()
        high = TestFamily(max_degree=16).members()
        for f, g in zip(low, high):
            assert g.degree == 16
            assert f.degree == 8

    def test_peak_coefficients(self):
        f = TestFamily(FamilyKind.PEAK_TRUNCATED, max_degree=3, count=1, rho=0.5, power=2.0).members()[0]
        # (1 - x)^-2 = 1 + 2x + 3x^2 + 4x^3
        np.testing.assert_allclose(f.coeffs, [0, 2 * 0.5, 3 * 0.25, 4 * 0.125])


class TestDeltaNorm:
    def test_p2_is_a_norm(self):
        probe = delta_norm_probe(2.0, TestFamily(count=6), SMALL_GRID)
        assert probe.triangle_constant <= 1.0 + 1e-12
        assert probe.ok

    def test_p_half_witness(self):
        family = TestFamily(FamilyKind.PEAK_TRUNCATED, max_degree=128, count=4, rho=0.8, power=6.0)
        probe = delta_norm_probe(0.5, family)
        assert probe.triangle_bound == 2.0
        assert 1.0 < probe.triangle_constant <= 2.0
        assert probe.ok

    @pytest.mark.parametrize("p", [0.5, 1.0, 3.0])
    def test_scaling_exponents(self, p):
        probe = delta_norm_probe(p, TestFamily(count=3), SMALL_GRID, WeightSpec.power(0.5))
        assert probe.a_exp == pytest.approx(1.0, abs=1e-9)
        assert probe.b_exp == pytest.approx(1.0, abs=1e-9)

    def test_homogeneity_direct(self):
        from harmconj.quadrature import weighted_p_norm

        f = TestFamily(count=1).members()[0]
        for p in (0.5, 2.0):
            spec = NormSpec(p)
            assert weighted_p_norm(lambda z: 3 * f(z), spec, SMALL_GRID) == pytest.approx(
                3 * weighted_p_norm(f, spec, SMALL_GRID), rel=1e-13
            )

    def test_probe_flags_bad_constant(self):
        assert not DeltaNormProbe(2.0, 1.5, 1.0, 1.0).ok


class TestOperatorConstants:
    def test_u_to_v_isometry_oracle(self):
        family = TestFamily(count=50, seed=11)
        ratios = operator_ratios(OperatorKind.U_TO_V, family, NormSpec(2.0))
        np.testing.assert_allclose(ratios, 1.0, atol=1e-6)
        from harmconj.quadrature import weighted_p_norm

        for f in family.members()[:10]:
            grid_sq = weighted_p_norm(lambda z: f(z).real, NormSpec(2.0)) ** 2
            assert grid_sq == pytest.approx(moment_norm_sq(f.coeffs), rel=1e-8)

    def test_u_to_v_identity(self):
        family = TestFamily(FamilyKind.PEAK_TRUNCATED, max_degree=1, count=3)
        assert estimate_operator_constant(OperatorKind.U_TO_V, family, NormSpec(2.0)) == pytest.approx(1.0, abs=1e-12)

    def test_deriv_to_f_closed_form(self):
        family = TestFamily(FamilyKind.PEAK_TRUNCATED, max_degree=1, count=3)
        value = estimate_operator_constant(OperatorKind.DERIV_TO_F, family, NormSpec(2.0))
        assert value == pytest.approx(np.sqrt(3.0), rel=1e-8)

    def test_zero_members_skipped(self):
        family = TestFamily(FamilyKind.RANDOM_POLY, max_degree=0, count=2)
        ratios = operator_ratios(OperatorKind.U_TO_V, family, NormSpec(2.0), SMALL_GRID)
        assert np.all(np.isnan(ratios))
        with pytest.raises(ValueError):
            estimate_operator_constant(OperatorKind.U_TO_V, family, NormSpec(2.0), SMALL_GRID)

    @pytest.mark.parametrize("kind", list(OperatorKind))
    def test_all_kinds_finite(self, kind):
        value = estimate_operator_constant(kind, TestFamily(count=6), NormSpec(1.0, WeightSpec.power(0.5)), SMALL_GRID)
        assert np.isfinite(value) and value > 0

    def test_u_to_v_drift(self):
        maxima, drifts = degree_drift(OperatorKind.U_TO_V, TestFamily(count=8), NormSpec(1.0, WeightSpec.power(0.5)), (8, 16))
        assert np.all(np.isfinite(maxima))
        assert max(drifts) <= 0.2

    def test_mc_composite_bounded(self):
        spec = NormSpec(2.0)
        maxima, drifts = degree_drift(OperatorKind.MC_COMPOSITE, TestFamily(count=6), spec, (8, 16), SMALL_GRID)
        assert max(drifts) <= 0.2

    def test_shift_depth_stable(self):
        spec = NormSpec(2.0, WeightSpec.power(1.0))
        for kind in (OperatorKind.SHIFT_RADIAL, OperatorKind.SHIFT_ROTATED):
            maxima, drifts = degree_drift(kind, TestFamily(count=6), spec, (8, 16), SMALL_GRID)
            assert max(drifts) <= 0.2

    def test_perturbation_continuity(self):
        family = TestFamily(count=8)
        base = WeightSpec.power(0.5)
        radial = estimate_operator_constant(OperatorKind.U_TO_V, family, NormSpec(1.0, base), SMALL_GRID)
        values = []
        for eps in (0.5, 0.1, 1e-3):
            w = WeightSpec.angular_perturbed(base, eps, 2)
            values.append(estimate_operator_constant(OperatorKind.U_TO_V, family, NormSpec(1.0, w), SMALL_GRID))
        assert values[-1] == pytest.approx(radial, rel=0.05)


class TestPipeline:
    def test_unit_weight(self):
        report = theorem_pipeline_report(TestFamily(max_degree=16, count=8), NormSpec(2.0), SMALL_GRID)
        d = report.as_dict()
        assert all(np.isfinite(d[k]) for k in ("u_to_deriv", "deriv_to_f", "u_to_v", "product"))
        assert report.consistent
        assert report.u_to_v == pytest.approx(1.0, abs=1e-6)

    def test_sqrt_weight_stable(self):
        spec = NormSpec(1.0, WeightSpec.power(0.5))
        a = theorem_pipeline_report(TestFamily(max_degree=8, count=6), spec, SMALL_GRID)
        b = theorem_pipeline_report(TestFamily(max_degree=16, count=6), spec, SMALL_GRID)
        assert a.consistent and b.consistent
        assert abs(b.u_to_v - a.u_to_v) <= 0.2 * a.u_to_v

    def test_divergent_weight(self):
        with pytest.raises(DivergenceError):
            theorem_pipeline_report(TestFamily(count=2), NormSpec(2.0, WeightSpec.power(-1.5)), SMALL_GRID)
