"""Scikit-learn style front end for the creep rupture-life fit.

``CreepRuptureRegressor`` wraps the constant search + STLS polynomial
selection behind the usual ``fit(X, y)`` / ``predict(X)`` surface so the
model slots into sklearn pipelines, grid searches, and clones. ``X`` carries
one operating condition per row, ``[stress_MPa, temperature_K]``; ``y`` is
the rupture time in hours.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .dataset import CreepDataset, CreepRecord, WinsorSpec
from .exceptions import OverflowRangeError
from .models import (EXPONENT_LIMIT, CreepModelKind, log10_time_exponent,
                     predicted_log10_time)
from .regression import StlsConfig, fit_constant_and_law


def _as_condition_matrix(X) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("X must be 2-D with columns [stress_mpa, temperature_K]")
    if not np.all(np.isfinite(arr)):
        raise ValueError("X contains non-finite entries")
    if np.any(arr <= 0):
        raise ValueError("stress and temperature must be > 0")
    return arr


class CreepRuptureRegressor(BaseEstimator, RegressorMixin):
    """Creep rupture-time model with joint constant and polynomial estimation.

    Parameters
    ----------
    kind : str, default "larson_miller"
        One of "larson_miller", "orr_sherby_dorn", "manson_succop".
    threshold : float, default 0.01
        STLS sparsity threshold on raw coefficient magnitudes.
    max_degree : int, default 8
        Largest candidate basis degree for the stress polynomial.
    cv_iterations : int, default 100
        Shuffled train/validation splits in the final cross-validation.
    cv_split : float, default 0.2
        Validation fraction of each split.
    winsor_limits : tuple or None, default (0.05, 0.95)
        Percentile pair clamping the regression response; None disables.
    constant_bracket : tuple or None
        Search interval for C; None picks the per-kind default.
    random_state : int, default 0
        Seed for every shuffle in the fit.

    Attributes
    ----------
    model_ : FittedCreepModel
    law_ : PolynomialLaw
    constant_ : float
    cv_report_ : CrossValReport
    """

    def __init__(self, kind="larson_miller", threshold=0.01, max_degree=8,
                 cv_iterations=100, cv_split=0.2, winsor_limits=(0.05, 0.95),
                 constant_bracket=None, random_state=0):
        self.kind = kind
        self.threshold = threshold
        self.max_degree = max_degree
        self.cv_iterations = cv_iterations
        self.cv_split = cv_split
        self.winsor_limits = winsor_limits
        self.constant_bracket = constant_bracket
        self.random_state = random_state

    def fit(self, X, y):
        """Fit the creep law to rupture observations.

        Returns
        -------
        self
        """
        X = _as_condition_matrix(X)
        y = np.asarray(y, dtype=float).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y must have the same number of rows")
        records = tuple(CreepRecord(s, t, tr) for (s, t), tr in zip(X, y))
        dataset = CreepDataset(records, source_label="estimator-fit")
        winsor = WinsorSpec(*self.winsor_limits) if self.winsor_limits is not None else None
        cfg = StlsConfig(threshold=self.threshold, max_degree=self.max_degree)
        self.model_, self.cv_report_ = fit_constant_and_law(
            dataset, CreepModelKind.coerce(self.kind), cfg,
            bracket=self.constant_bracket, cv_iterations=self.cv_iterations,
            split=self.cv_split, seed=self.random_state, winsor=winsor)
        self.law_ = self.model_.law
        self.constant_ = self.model_.constant
        self.n_features_in_ = 2
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("this CreepRuptureRegressor is not fitted yet; call fit first")

    def predict(self, X) -> np.ndarray:
        """Predicted rupture time in hours, one value per condition row."""
        self._check_fitted()
        X = _as_condition_matrix(X)
        exponents = log10_time_exponent(self.model_.kind, self.model_.law(X[:, 0]),
                                        self.model_.constant, X[:, 1])
        worst = exponents[np.argmax(np.abs(exponents))] if exponents.size else 0.0
        if np.abs(exponents).max(initial=0.0) > EXPONENT_LIMIT:
            raise OverflowRangeError(float(worst))
        return 10.0 ** exponents

    def predict_log10(self, X) -> np.ndarray:
        """Predicted log10 rupture time (the regression observable)."""
        self._check_fitted()
        X = _as_condition_matrix(X)
        return np.asarray(predicted_log10_time(self.model_, X[:, 0], X[:, 1]), dtype=float)
