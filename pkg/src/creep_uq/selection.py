"""Probabilistic model scoring and ranking by information criteria.

The Gaussian likelihood is evaluated at the fitted parameter means on the
log10 rupture-time observable; AIC and BIC then trade that fit quality
against the number of uncertain parameters. Lower is better, and BIC leads
the ranking because it penalizes complexity harder once m >= 8 observations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import CreepDataset
from .exceptions import ComparabilityError
from .models import CreepModelKind, FittedCreepModel, predicted_log10_time


@dataclass(frozen=True)
class ModelScore:
    """Likelihood and information criteria for one fitted creep model."""

    kind: CreepModelKind
    log_likelihood: float
    aic: float
    bic: float
    n_params: int
    n_obs: int

    def __post_init__(self):
        object.__setattr__(self, "kind", CreepModelKind.coerce(self.kind))
        if abs(self.aic - (2.0 * self.n_params - 2.0 * self.log_likelihood)) > 1e-12:
            raise ValueError("aic does not satisfy 2 n - 2 lnL")
        expected_bic = self.n_params * np.log(self.n_obs) - 2.0 * self.log_likelihood
        if abs(self.bic - expected_bic) > 1e-12:
            raise ValueError("bic does not satisfy n ln m - 2 lnL")


def log_likelihood(dataset: CreepDataset, model: FittedCreepModel,
                   error_var: float) -> float:
    """Gaussian log-likelihood of the observed log10 rupture times.

    ln L = -(m/2) ln(2 pi) - m ln(sigma_e) - sum of squared residuals
    / (2 sigma_e^2), with the residuals taken against the model prediction
    at its fitted values.
    """
    if error_var <= 0:
        raise ValueError(f"error variance must be > 0, got {error_var!r}")
    y = np.log10(dataset.rupture_times())
    y_hat = predicted_log10_time(model, dataset.stresses(), dataset.temperatures())
    m = len(dataset)
    rss = float(np.sum((y - y_hat) ** 2))
    return float(-(m / 2.0) * np.log(2.0 * np.pi)
                 - (m / 2.0) * np.log(error_var)
                 - rss / (2.0 * error_var))


def score(dataset: CreepDataset, model: FittedCreepModel, error_var: float,
          n_params: int | None = None) -> ModelScore:
    """AIC and BIC for one model on one dataset.

    ``n_params`` counts the uncertain parameters (retained random
    coefficients plus the constant when retained); it defaults to all active
    model parameters. The error variance itself is not counted.
    """
    if n_params is None:
        n_params = len(model.parameter_names())
    if n_params < 1:
        raise ValueError("n_params must be >= 1")
    lnl = log_likelihood(dataset, model, error_var)
    m = len(dataset)
    return ModelScore(kind=model.kind, log_likelihood=lnl,
                      aic=2.0 * n_params - 2.0 * lnl,
                      bic=n_params * float(np.log(m)) - 2.0 * lnl,
                      n_params=n_params, n_obs=m)


def rank(scores) -> list[ModelScore]:
    """Order scores ascending by BIC, then AIC, then parameter count.

    All scores must come from the same dataset (checked through matching
    observation counts). The result is a total order independent of the
    input permutation.
    """
    scores = list(scores)
    if not scores:
        raise ValueError("no scores to rank")
    counts = {s.n_obs for s in scores}
    if len(counts) > 1:
        raise ComparabilityError(
            f"scores computed on different datasets (n_obs = {sorted(counts)})")
    return sorted(scores, key=lambda s: (s.bic, s.aic, s.n_params, s.kind.value))


def score_csv_rows(ranked) -> list[tuple]:
    """Rows for the ``model,n_params,n_obs,log_likelihood,aic,bic,rank`` export."""
    rows = [("model", "n_params", "n_obs", "log_likelihood", "aic", "bic", "rank")]
    for position, s in enumerate(ranked, start=1):
        rows.append((s.kind.value, s.n_params, s.n_obs, repr(s.log_likelihood),
                     repr(s.aic), repr(s.bic), position))
    return rows
