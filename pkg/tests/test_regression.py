"""Least squares, STLS sparsity, cross-validation and the constant search."""

import itertools

import numpy as np
import pytest

from creep_uq import (BracketError, CreepModelKind, DesignMatrix, EmptyModelError,
                      RankDeficiencyError, StlsConfig, WinsorSpec, cross_validate,
                      fit_constant_and_law, least_squares, parameter_values, rmse,
                      stls)

from conftest import LM_CONSTANT, OSD_CONSTANT, TRUTHS, make_oracle


def exhaustive_best_subset(entries, y, penalty):
    """Independent oracle: minimize ||y - A x||^2 + penalty * |support| over
    every support subset, solving each subproblem with plain numpy lstsq."""
    n = entries.shape[1]
    best_cost, best_support, best_coef = np.dot(y, y), (), None
    for size in range(1, n + 1):
        for support in itertools.combinations(range(n), size):
            sub = entries[:, support]
            coef, _, _, _ = np.linalg.lstsq(sub, y, rcond=None)
            resid = y - sub @ coef
            cost = float(resid @ resid) + penalty * size
            if cost < best_cost - 1e-12:
                best_cost, best_support, best_coef = cost, support, coef
    return best_support, best_coef


class TestLeastSquares:
    def test_degree_zero_is_mean(self):
        design = DesignMatrix.vandermonde([3.0, 5.0], 0)
        assert least_squares(design, [3.0, 5.0])[0] == pytest.approx(4.0)

    def test_exact_affine_interpolation(self):
        sigma = np.array([1.0, 2.0, 3.0])
        design = DesignMatrix.vandermonde(sigma, 1)
        coef = least_squares(design, 2.0 + 3.0 * sigma)
        assert coef == pytest.approx([2.0, 3.0], abs=1e-10)

    def test_duplicated_column_rank_error(self):
        design = DesignMatrix.from_stresses([1.0, 2.0, 3.0], [0, 1, 1])
        with pytest.raises(RankDeficiencyError, match="a1"):
            least_squares(design, [1.0, 2.0, 3.0])

    def test_more_columns_than_rows(self):
        design = DesignMatrix.vandermonde([1.0, 2.0], 3)
        with pytest.raises(RankDeficiencyError):
            least_squares(design, [1.0, 2.0])

    def test_residual_orthogonal_to_columns(self, rng):
        sigma = rng.uniform(40.0, 350.0, size=30)
        design = DesignMatrix.vandermonde(sigma, 6)
        y = rng.normal(2e4, 5e2, size=30)
        coef = least_squares(design, y)
        resid = y - design.entries @ coef
        # orthogonality scaled per column
        for col in range(design.entries.shape[1]):
            c = design.entries[:, col]
            assert abs(resid @ c) <= 1e-8 * np.linalg.norm(y) * np.linalg.norm(c)

    def test_severe_scaling_still_solves(self, rng):
        # sigma^8 spans ~20 decades over this range; the solve must survive it
        sigma = rng.uniform(40.0, 350.0, size=40)
        design = DesignMatrix.vandermonde(sigma, 8)
        truth = np.zeros(9)
        truth[0], truth[1] = 22205.0, -12.0
        y = design.entries @ truth
        coef = least_squares(design, y)
        assert coef[0] == pytest.approx(22205.0, rel=1e-6)
        assert coef[1] == pytest.approx(-12.0, rel=1e-5)


class TestStls:
    def test_support_recovery_vs_exhaustive(self):
        sigma = np.arange(1.0, 11.0)
        design = DesignMatrix.vandermonde(sigma, 4)
        y = 2.0 + 3.0 * sigma
        law = stls(design, y, StlsConfig(threshold=0.5, max_degree=4))
        assert law.active_powers() == (0, 1)
        assert law.coefficients[0] == pytest.approx(2.0, abs=1e-6)
        assert law.coefficients[1] == pytest.approx(3.0, abs=1e-6)
        support, coef = exhaustive_best_subset(design.entries, y, penalty=0.5)
        assert support == (0, 1)
        assert coef == pytest.approx([2.0, 3.0], abs=1e-8)

    def test_small_threshold_equals_least_squares(self, rng):
        sigma = rng.uniform(1.0, 10.0, size=20)
        design = DesignMatrix.vandermonde(sigma, 3)
        y = 5.0 - 2.0 * sigma + 0.3 * sigma ** 2 - 0.05 * sigma ** 3
        y += rng.normal(0, 0.01, size=20)
        ols = least_squares(design, y)
        law = stls(design, y, StlsConfig(threshold=min(np.abs(ols)) * 0.5))
        assert law.coefficients == pytest.approx(ols, rel=1e-12)

    def test_huge_threshold_empty_model(self):
        sigma = np.arange(1.0, 6.0)
        design = DesignMatrix.vandermonde(sigma, 2)
        with pytest.raises(EmptyModelError):
            stls(design, 2.0 + 3.0 * sigma, StlsConfig(threshold=1e9))

    def test_iteration_cap_warns_not_raises(self):
        import warnings as warnings_module
        from sklearn.exceptions import ConvergenceWarning
        sigma = np.arange(1.0, 11.0)
        design = DesignMatrix.vandermonde(sigma, 4)
        y = 2.0 + 3.0 * sigma
        with warnings_module.catch_warnings(record=True) as caught:
            warnings_module.simplefilter("always")
            law = stls(design, y, StlsConfig(threshold=0.5, max_iterations=1))
        assert any(issubclass(w.category, ConvergenceWarning) for w in caught)
        # the pending threshold is still applied to the returned law
        assert law.active_powers() == (0, 1)

    def test_active_set_is_fixed_point(self):
        sigma = np.arange(1.0, 11.0)
        design = DesignMatrix.vandermonde(sigma, 4)
        y = 2.0 + 3.0 * sigma
        cfg = StlsConfig(threshold=0.5)
        law = stls(design, y, cfg)
        active = law.active_powers()
        again = stls(DesignMatrix.from_stresses(sigma, active), y, cfg)
        assert again.coefficients == law.coefficients

    def test_normalized_thresholding_is_scale_free(self):
        # a1 = 1e-3 falls below the raw threshold but carries real signal; the
        # column-normalized comparison keeps it
        sigma = np.linspace(100.0, 300.0, 15)
        y = 5.0 + 1e-3 * sigma
        design = DesignMatrix.vandermonde(sigma, 2)
        raw = stls(design, y, StlsConfig(threshold=0.01))
        assert raw.active_powers() == (0,)
        normalized = stls(design, y, StlsConfig(threshold=0.01, normalize_columns=True))
        assert normalized.active_powers() == (0, 1)
        assert normalized.coefficients[1] == pytest.approx(1e-3, rel=1e-6)

    def test_sparsity_never_beats_ols_residual(self, rng):
        sigma = rng.uniform(1.0, 10.0, size=25)
        design = DesignMatrix.vandermonde(sigma, 4)
        y = 1.0 + 0.4 * sigma + rng.normal(0, 0.5, size=25)
        ols_resid = np.linalg.norm(y - design.entries @ least_squares(design, y))
        law = stls(design, y, StlsConfig(threshold=0.2))
        stls_resid = np.linalg.norm(y - law(sigma))
        assert stls_resid >= ols_resid - 1e-10


class TestRmse:
    def test_two_fold_example(self):
        assert rmse([3.0, 4.0]) == pytest.approx(np.sqrt(25.0 / 2.0))

    def test_zero_errors(self):
        assert rmse([0.0, 0.0, 0.0]) == 0.0

    def test_sign_flip_invariance(self, rng):
        e = rng.normal(size=12)
        flips = rng.choice([-1.0, 1.0], size=12)
        assert rmse(e) == pytest.approx(rmse(e * flips), rel=1e-15)


class TestCrossValidate:
    def test_noiseless_affine_recovers(self):
        sigma = np.linspace(40.0, 350.0, 24)
        response = 22205.0 - 12.0 * sigma
        report = cross_validate(sigma, response, StlsConfig(threshold=0.01),
                                iterations=20, seed=3)
        assert report.best.active_powers() == (0, 1)
        assert report.best_rmse < 1e-9
        assert report.best.coefficients == pytest.approx([22205.0, -12.0], rel=1e-9)

    def test_seed_determinism(self):
        sigma = np.linspace(40.0, 350.0, 24)
        response = 22205.0 - 12.0 * sigma + np.sin(sigma)
        cfg = StlsConfig(threshold=0.01)
        a = cross_validate(sigma, response, cfg, iterations=10, seed=5)
        b = cross_validate(sigma, response, cfg, iterations=10, seed=5)
        assert a.best == b.best and a.best_rmse == b.best_rmse
        assert [c.rmse for c in a.candidates] == [c.rmse for c in b.candidates]

    def test_different_seeds_same_support_on_noiseless(self):
        sigma = np.linspace(40.0, 350.0, 24)
        response = 22205.0 - 12.0 * sigma
        cfg = StlsConfig(threshold=0.01)
        a = cross_validate(sigma, response, cfg, iterations=15, seed=1)
        b = cross_validate(sigma, response, cfg, iterations=15, seed=99)
        assert a.best.active_powers() == b.best.active_powers()

    def test_split_validation(self):
        sigma = np.linspace(1.0, 10.0, 10)
        with pytest.raises(ValueError):
            cross_validate(sigma, sigma, StlsConfig(threshold=0.1), split=1.0)
        with pytest.raises(ValueError):
            cross_validate(sigma, sigma, StlsConfig(threshold=0.1), split=0.0)

    def test_csv_rows_schema(self):
        sigma = np.linspace(1.0, 10.0, 12)
        report = cross_validate(sigma, 2 + 3 * sigma, StlsConfig(threshold=0.5),
                                iterations=4, seed=0)
        rows = list(report.csv_rows())
        assert rows[0] == ("iteration", "degree", "rmse", "selected")
        assert any(row[3] == 1 for row in rows[1:])
        assert all(float(row[2]) >= 0 for row in rows[1:])

    def test_report_invariant_best_is_minimum(self):
        sigma = np.linspace(1.0, 10.0, 12)
        report = cross_validate(sigma, 1 + sigma ** 2, StlsConfig(threshold=0.01),
                                iterations=6, seed=2)
        assert report.best_rmse <= min(c.rmse for c in report.candidates) + 1e-12


class TestFitConstantAndLaw:
    def test_recovers_lm_constant_noiseless(self, lm_noiseless):
        cfg = StlsConfig(threshold=0.01)
        model, report = fit_constant_and_law(lm_noiseless, "larson_miller", cfg,
                                             cv_iterations=20, seed=4)
        assert model.constant == pytest.approx(LM_CONSTANT, abs=0.5)
        assert model.law.coefficients == pytest.approx([22205.0, -12.0], rel=1e-4)
        assert report.best_rmse < 1e-2

    def test_recovers_osd_constant_noiseless(self, osd_noiseless):
        cfg = StlsConfig(threshold=5e-6)
        model, _ = fit_constant_and_law(osd_noiseless, "orr_sherby_dorn", cfg,
                                        cv_iterations=20, seed=4)
        assert model.constant == pytest.approx(OSD_CONSTANT, rel=0.01)

    def test_law_matches_truth_when_noiseless(self, ms_noiseless):
        cfg = StlsConfig(threshold=5e-6)
        model, _ = fit_constant_and_law(ms_noiseless, "manson_succop", cfg,
                                        cv_iterations=20, seed=4)
        truth = TRUTHS[CreepModelKind.MANSON_SUCCOP][0]
        for got, want in zip(model.law.coefficients, truth.coefficients):
            assert got == pytest.approx(want, rel=1e-4)

    def test_error_shrinks_with_noise(self):
        errors = []
        for noise in (0.0, 0.01, 0.05):
            ds = make_oracle("larson_miller", noise_sd=noise, seed=17, repeats=2)
            model, _ = fit_constant_and_law(ds, "larson_miller",
                                            StlsConfig(threshold=0.01),
                                            cv_iterations=15, seed=6)
            errors.append(abs(model.constant - LM_CONSTANT))
        assert errors[0] < 0.05
        assert errors[1] < 0.5
        assert errors[2] < 1.5

    def test_winsorized_fit_still_recovers(self, lm_noiseless):
        model, _ = fit_constant_and_law(lm_noiseless, "larson_miller",
                                        StlsConfig(threshold=0.01),
                                        cv_iterations=15, seed=2,
                                        winsor=WinsorSpec(0.05, 0.95))
        assert model.constant == pytest.approx(LM_CONSTANT, abs=0.5)

    def test_bracket_error_on_monotone_objective(self, osd_noiseless):
        # the optimum sits near 2.1e4; a bracket far above it sees a strictly
        # increasing objective and must refuse rather than return an endpoint
        with pytest.raises(BracketError, match="f\\(lo\\)"):
            fit_constant_and_law(osd_noiseless, "orr_sherby_dorn",
                                 StlsConfig(threshold=5e-6),
                                 bracket=(1e6, 2e6), cv_iterations=8, seed=1)

    def test_paper_magnitude_thresholds_select_low_degree(self):
        # noisy data from an affine law never needs powers above degree 3
        ds = make_oracle("larson_miller", noise_sd=0.05, seed=23, repeats=2)
        sigma = ds.stresses()
        response = parameter_values("larson_miller", ds, LM_CONSTANT)
        report = cross_validate(sigma, response, StlsConfig(threshold=0.01),
                                iterations=25, seed=8)
        assert max(report.best.active_powers()) <= 3
