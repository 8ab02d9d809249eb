"""Sobol indices: Monte Carlo pick-freeze and polynomial chaos routes."""

import numpy as np
import pytest

from creep_uq import (DegenerateVarianceError, EvaluationFailureError,
                      FittedCreepModel, PceExpansion, PolynomialLaw, SobolReport,
                      UnderdeterminedError, UniformInputSpec, gaussian_input_box,
                      pce_fit, rank_parameters, rupture_time_map, sobol_from_pce,
                      sobol_mc)
from creep_uq.sensitivity import pce_basis_size, total_degree_multi_indices

UNIT_SQUARE = UniformInputSpec(["x1", "x2"], [0.0, 0.0], [1.0, 1.0])


def additive(X):
    return X[:, 0] + 2.0 * X[:, 1]


def ishigami(X, a=7.0, b=0.1):
    return (np.sin(X[:, 0]) + a * np.sin(X[:, 1]) ** 2
            + b * X[:, 2] ** 4 * np.sin(X[:, 0]))


def ishigami_analytic(a=7.0, b=0.1):
    # closed-form partial variances, re-derived from the function definition:
    # V  = a^2/8 + b pi^4/5 + b^2 pi^8/18 + 1/2
    # D1 = b pi^4/5 + b^2 pi^8/50 + 1/2, D2 = a^2/8, D3 = 0
    v = a ** 2 / 8 + b * np.pi ** 4 / 5 + b ** 2 * np.pi ** 8 / 18 + 0.5
    d1 = b * np.pi ** 4 / 5 + b ** 2 * np.pi ** 8 / 50 + 0.5
    d2 = a ** 2 / 8
    return d1 / v, d2 / v, 0.0


class TestInputSpec:
    def test_validation(self):
        with pytest.raises(ValueError, match="unique"):
            UniformInputSpec(["a", "a"], [0, 0], [1, 1])
        with pytest.raises(ValueError, match="lower bound"):
            UniformInputSpec(["a", "b"], [0, 2], [1, 1])
        with pytest.raises(ValueError, match="matching lengths"):
            UniformInputSpec(["a"], [0, 0], [1, 1])

    def test_sample_inside_box(self, rng):
        spec = UniformInputSpec(["u", "v"], [-2.0, 5.0], [-1.0, 9.0])
        x = spec.sample(500, rng)
        assert np.all(x >= spec.lower) and np.all(x <= spec.upper)
        z = spec.to_unit(x)
        assert np.all(np.abs(z) <= 1.0)


class TestSobolMc:
    def test_constant_model_degenerate(self):
        with pytest.raises(DegenerateVarianceError):
            sobol_mc(lambda X: np.full(len(X), 3.0), UNIT_SQUARE, n=500, seed=0)

    def test_additive_oracle(self):
        report = sobol_mc(additive, UNIT_SQUARE, n=10_000, seed=1)
        assert report.first_order["x1"] == pytest.approx(0.2, abs=0.03)
        assert report.first_order["x2"] == pytest.approx(0.8, abs=0.03)
        assert report.total["x1"] == pytest.approx(0.2, abs=0.03)
        assert report.total["x2"] == pytest.approx(0.8, abs=0.03)

    def test_ishigami_closed_form(self):
        spec = UniformInputSpec(["x1", "x2", "x3"], [-np.pi] * 3, [np.pi] * 3)
        report = sobol_mc(ishigami, spec, n=10_000, seed=2)
        s1, s2, s3 = ishigami_analytic()
        assert report.first_order["x1"] == pytest.approx(s1, abs=0.03)
        assert report.first_order["x2"] == pytest.approx(s2, abs=0.03)
        assert report.first_order["x3"] == pytest.approx(s3, abs=0.03)

    def test_seed_determinism(self):
        a = sobol_mc(additive, UNIT_SQUARE, n=1000, seed=3)
        b = sobol_mc(additive, UNIT_SQUARE, n=1000, seed=3)
        assert a == b

    def test_sample_floor(self):
        with pytest.raises(ValueError):
            sobol_mc(additive, UNIT_SQUARE, n=50, seed=0)

    def test_failure_rate_guard(self):
        def flaky(X):
            out = additive(X)
            out[X[:, 0] < 0.05] = np.nan  # ~5% failures
            return out

        with pytest.raises(EvaluationFailureError, match="> 1%"):
            sobol_mc(flaky, UNIT_SQUARE, n=2000, seed=4)

    def test_small_failure_rate_tolerated(self):
        def rarely_flaky(X):
            out = additive(X)
            out[X[:, 0] < 0.001] = np.nan
            return out

        report = sobol_mc(rarely_flaky, UNIT_SQUARE, n=5000, seed=5)
        assert report.n_failures > 0
        assert report.first_order["x2"] == pytest.approx(0.8, abs=0.05)

    def test_index_sums_additive(self):
        report = sobol_mc(additive, UNIT_SQUARE, n=10_000, seed=6)
        assert sum(report.first_order.values()) <= 1.0 + 0.05
        assert sum(report.total.values()) >= 1.0 - 0.05


class TestPceFit:
    def test_linear_function_exact_coefficient(self):
        spec = UniformInputSpec(["x1", "x2"], [-1.0, -1.0], [1.0, 1.0])
        exp = pce_fit(lambda X: X[:, 0], spec, n=200, max_degree=2, seed=0)
        key = (1, 0)
        assert exp.coefficients[key] == pytest.approx(1.0 / np.sqrt(3.0), abs=1e-10)
        others = [v for k, v in exp.coefficients.items() if k != key]
        assert np.allclose(others, 0.0, atol=1e-10)
        assert exp.variance() == pytest.approx(1.0 / 3.0, abs=1e-10)

    def test_constant_function(self):
        exp = pce_fit(lambda X: np.full(len(X), 4.25), UNIT_SQUARE,
                      n=100, max_degree=2, seed=1)
        assert exp.mean() == pytest.approx(4.25, abs=1e-12)
        assert exp.variance() == pytest.approx(0.0, abs=1e-18)

    def test_product_variance_matches_analytic(self):
        # V(X1 X2) for independent U(0,1): E[X^2]^2 - (E[X]^2)^2 = 1/9 - 1/16
        exp = pce_fit(lambda X: X[:, 0] * X[:, 1], UNIT_SQUARE,
                      n=600, max_degree=3, seed=2)
        assert exp.variance() == pytest.approx(7.0 / 144.0, abs=1e-6)

    def test_underdetermined_guard_names_both_numbers(self):
        spec = UniformInputSpec(["a", "b", "c"], [0, 0, 0], [1, 1, 1])
        with pytest.raises(UnderdeterminedError, match="286"):
            pce_fit(lambda X: X[:, 0], spec, n=100, max_degree=10, seed=0)

    def test_basis_size(self):
        assert pce_basis_size(3, 10) == 286
        assert pce_basis_size(2, 3) == 10
        assert len(total_degree_multi_indices(3, 10)) == 286

    def test_variance_matches_empirical_within_residual(self):
        spec = UniformInputSpec(["x1", "x2"], [0.0, 0.0], [1.0, 1.0])
        rng = np.random.default_rng(7)
        exp = pce_fit(additive, spec, n=800, max_degree=4, seed=3)
        x = spec.sample(4000, rng)
        assert exp.variance() == pytest.approx(float(np.var(additive(x))), rel=0.05)


class TestSobolFromPce:
    def test_additive_exact(self):
        exp = pce_fit(additive, UNIT_SQUARE, n=400, max_degree=3, seed=4)
        report = sobol_from_pce(exp)
        assert report.first_order["x1"] == pytest.approx(0.2, abs=1e-6)
        assert report.first_order["x2"] == pytest.approx(0.8, abs=1e-6)
        assert report.total["x1"] == pytest.approx(report.first_order["x1"], abs=1e-9)
        assert sum(report.first_order.values()) == pytest.approx(1.0, abs=1e-9)

    def test_product_interaction(self):
        exp = pce_fit(lambda X: X[:, 0] * X[:, 1], UNIT_SQUARE,
                      n=600, max_degree=3, seed=5)
        report = sobol_from_pce(exp)
        # analytic: D_i = 1/48, D = 7/144 -> S_i = 3/7; total = 4/7
        assert report.first_order["x1"] == pytest.approx(3.0 / 7.0, abs=1e-6)
        assert report.first_order["x2"] == pytest.approx(report.first_order["x1"], abs=1e-9)
        assert report.total["x1"] == pytest.approx(4.0 / 7.0, abs=1e-6)
        assert report.total["x1"] > report.first_order["x1"]

    def test_indices_in_unit_interval(self):
        exp = pce_fit(ishigami, UniformInputSpec(["x1", "x2", "x3"],
                                                 [-np.pi] * 3, [np.pi] * 3),
                      n=1000, max_degree=9, seed=6)
        report = sobol_from_pce(exp)
        for s in list(report.first_order.values()) + list(report.total.values()):
            assert 0.0 <= s <= 1.0

    def test_permutation_invariance(self):
        exp = pce_fit(additive, UNIT_SQUARE, n=400, max_degree=3, seed=7)
        shuffled = PceExpansion(dict(reversed(list(exp.coefficients.items()))),
                                exp.max_degree, exp.input_spec, exp.n_samples)
        assert sobol_from_pce(exp) == sobol_from_pce(shuffled)

    def test_degenerate_expansion(self):
        exp = PceExpansion({(0, 0): 5.0}, 1, UNIT_SQUARE, 10)
        with pytest.raises(DegenerateVarianceError):
            sobol_from_pce(exp)

    def test_mc_and_pce_agree_on_additive(self):
        mc = sobol_mc(additive, UNIT_SQUARE, n=10_000, seed=8)
        pce = sobol_from_pce(pce_fit(additive, UNIT_SQUARE, n=400, max_degree=2, seed=8))
        for name in ("x1", "x2"):
            assert mc.first_order[name] == pytest.approx(pce.first_order[name], abs=0.03)
            assert mc.total[name] == pytest.approx(pce.total[name], abs=0.03)


class TestRankParameters:
    def _report(self):
        return sobol_from_pce(pce_fit(additive, UNIT_SQUARE, n=400,
                                      max_degree=2, seed=9))

    def test_zero_threshold_retains_everything(self):
        retained, frozen = rank_parameters(self._report(), total_threshold=0.0)
        assert retained == ("x1", "x2") and frozen == ()

    def test_threshold_freezes_weak_input(self):
        retained, frozen = rank_parameters(self._report(), total_threshold=0.5)
        assert retained == ("x2",) and frozen == ("x1",)

    def test_all_frozen_is_error(self):
        with pytest.raises(DegenerateVarianceError):
            rank_parameters(self._report(), total_threshold=2.0)

    def test_subset_names(self):
        retained, frozen = rank_parameters(self._report(), total_threshold=0.5,
                                           names=["x2"])
        assert retained == ("x2",) and frozen == ()
        with pytest.raises(DegenerateVarianceError):
            rank_parameters(self._report(), total_threshold=0.5, names=["x1"])

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            rank_parameters(self._report(), names=["zz"])

    def test_freezing_zero_index_input_keeps_distribution(self):
        # x3 is inert in the additive model; freezing it at its mean must not
        # move the output moments
        spec = UniformInputSpec(["x1", "x2", "x3"], [0, 0, 0], [1, 1, 1])
        random_x3 = spec.sample(20_000, np.random.default_rng(1))
        frozen_x3 = spec.sample(20_000, np.random.default_rng(2))
        frozen_x3[:, 2] = 0.5
        full, frozen = additive(random_x3), additive(frozen_x3)
        assert np.mean(full) == pytest.approx(np.mean(frozen), abs=0.02)
        assert np.std(full) == pytest.approx(np.std(frozen), abs=0.02)


class TestGaussianInputBox:
    def test_symmetric_bounds(self):
        spec = gaussian_input_box(["a", "b"], [10.0, -4.0], [1.0, 0.5], width=3.0)
        assert spec.lower == pytest.approx([7.0, -5.5])
        assert spec.upper == pytest.approx([13.0, -2.5])

    def test_positive_clipping(self):
        spec = gaussian_input_box(["C"], [2.0], [1.0], width=3.0, positive=("C",))
        assert spec.lower[0] > 0.0
        assert spec.upper[0] == pytest.approx(5.0)

    def test_positive_requires_positive_mean(self):
        with pytest.raises(ValueError, match="positive mean"):
            gaussian_input_box(["C"], [-2.0], [1.0], positive=("C",))

    def test_zero_se_floor(self):
        spec = gaussian_input_box(["a"], [5.0], [0.0])
        assert spec.upper[0] > spec.lower[0]


class TestSobolReportContract:
    def test_csv_rows(self):
        report = sobol_mc(additive, UNIT_SQUARE, n=1000, seed=10)
        rows = list(report.csv_rows())
        assert rows[0] == ("parameter", "first_order", "total", "estimator", "samples")
        assert {r[0] for r in rows[1:]} == {"x1", "x2"}

    def test_out_of_range_index_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            SobolReport({"a": -0.2}, {"a": 0.1}, "monte_carlo", 100)

    def test_total_below_first_rejected(self):
        with pytest.raises(ValueError, match="below its first-order"):
            SobolReport({"a": 0.5}, {"a": 0.3}, "monte_carlo", 100)


class TestCreepMapIntegration:
    def test_rupture_map_overflow_counts_as_failure(self):
        model = FittedCreepModel("orr_sherby_dorn", PolynomialLaw([2.0]), 100.0)
        fn = rupture_time_map("orr_sherby_dorn", model, ["a0"], (100.0, 800.0))
        out = fn(np.array([[2.0], [400.0]]))
        assert np.isfinite(out[0])
        assert np.isnan(out[1])
