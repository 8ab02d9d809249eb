"""Gaussian parameter uncertainty and Monte Carlo propagation.

The retained creep-model parameters get a multivariate Gaussian description:
the mean is the least-squares estimate and the covariance follows from the
prediction-error variance through the design matrix of partial derivatives.
Correlated samples are drawn through a Cholesky-type factor and pushed
through the rupture-time map; the resulting ensemble is summarized by
moments, a histogram and an equal-tailed 95% interval.

Sampling is chunked with per-chunk seed substreams, so results are identical
regardless of how callers schedule the chunks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dataset import CreepDataset, percentile
from .exceptions import (DataError, DegreesOfFreedomError, EvaluationFailureError,
                         FactorizationError, RankDeficiencyError)
from .models import (EXPONENT_LIMIT, CreepModelKind, FittedCreepModel,
                     log10_time_exponent, predicted_log10_time, predictor_partials)
from .validation import check_condition, check_int_at_least, check_seed

logger = logging.getLogger(__name__)

SAMPLE_CHUNK = 8192
PIVOT_TOLERANCE = 1e-10
MAX_OVERFLOW_RATE = 0.01


@dataclass(frozen=True)
class GaussianParameterModel:
    """Multivariate Gaussian over the retained parameters, plus frozen values."""

    names: tuple[str, ...]
    mean: np.ndarray
    covariance: np.ndarray
    frozen: dict[str, float]

    def __init__(self, names, mean, covariance, frozen=None):
        names = tuple(str(n) for n in names)
        mean = np.asarray(mean, dtype=float)
        cov = np.asarray(covariance, dtype=float)
        d = len(names)
        if mean.shape != (d,) or cov.shape != (d, d):
            raise ValueError("mean must be (d,) and covariance (d, d) with d = len(names)")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("mean and covariance must be finite")
        scale = max(1.0, float(np.abs(cov).max(initial=0.0)))
        if np.abs(cov - cov.T).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("covariance is not symmetric within 1e-12")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", (cov + cov.T) / 2.0)
        object.__setattr__(self, "frozen", dict(frozen or {}))

    @property
    def dim(self) -> int:
        return len(self.names)

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "mean": [float(v) for v in self.mean],
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "frozen": {k: float(v) for k, v in self.frozen.items()},
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GaussianParameterModel":
        return cls(payload["names"], payload["mean"], payload["covariance"],
                   payload.get("frozen", {}))


@dataclass(frozen=True)
class SummaryStats:
    """Moment summary of an ensemble (biased central moments)."""

    mean: float
    std: float
    cov: float
    skewness: float
    excess_kurtosis: float

    @property
    def kurtosis(self) -> float:
        """Raw (non-excess) kurtosis."""
        return self.excess_kurtosis + 3.0

    @classmethod
    def from_samples(cls, samples) -> "SummaryStats":
        x = np.asarray(samples, dtype=float)
        mean = float(np.mean(x))
        centered = x - mean
        scale = float(np.abs(centered).max(initial=0.0))
        if scale == 0.0:
            # point mass: only std and cov are meaningful
            return cls(mean=mean, std=0.0, cov=0.0, skewness=0.0, excess_kurtosis=0.0)
        # moments on unit-rescaled deviations so wide ensembles cannot
        # overflow the 3rd/4th powers
        u = centered / scale
        m2 = float(np.mean(u ** 2))
        std = scale * float(np.sqrt(m2))
        skew = float(np.mean(u ** 3) / m2 ** 1.5)
        ex_kurt = float(np.mean(u ** 4) / m2 ** 2 - 3.0)
        return cls(mean=mean, std=std, cov=std / mean if mean != 0 else 0.0,
                   skewness=skew, excess_kurtosis=ex_kurt)


@dataclass(frozen=True)
class RuptureTimeEnsemble:
    """Monte Carlo rupture-time samples at one condition, with summaries."""

    samples: np.ndarray
    condition: tuple[float, float]
    stats: SummaryStats
    ci95: tuple[float, float]
    n_overflow: int = 0

    def histogram(self, bins: int = 50) -> tuple[np.ndarray, np.ndarray]:
        return histogram(self.samples, bins)


def error_variance(dataset: CreepDataset, model: FittedCreepModel,
                   n_params: int | None = None) -> float:
    """Unbiased variance of the log10 rupture-time prediction error.

    Residuals are log10 t_r minus the model prediction at its fitted values;
    the divisor is m - n with n the number of free model parameters
    (defaults to the active coefficients plus the constant).
    """
    if n_params is None:
        n_params = len(model.parameter_names())
    m = len(dataset)
    if m <= n_params:
        raise DegreesOfFreedomError(
            f"need more observations ({m}) than parameters ({n_params})")
    residuals = np.log10(dataset.rupture_times()) - predicted_log10_time(
        model, dataset.stresses(), dataset.temperatures())
    return float(np.sum(residuals ** 2) / (m - n_params))


def parameter_covariance(dataset: CreepDataset, model: FittedCreepModel,
                         retained, error_var: float) -> GaussianParameterModel:
    """Gaussian parameter model from least-squares error statistics.

    The design matrix stacks the partial derivatives of the predicted
    log10 t_r with respect to each retained parameter, evaluated at the
    fitted values; the covariance is error_var * (A^T A)^{-1}. Parameters of
    the model not retained are recorded as frozen point values.

    Raises
    ------
    RankDeficiencyError
        Collinear retained parameters (named in the message).
    """
    retained = tuple(retained)
    if not retained:
        raise ValueError("retained parameter list must be non-empty")
    if error_var < 0:
        raise ValueError("error_var must be >= 0")
    rows = [predictor_partials(model.kind, model, r.stress, r.temperature, retained)
            for r in dataset]
    a = np.vstack(rows)
    m, n = a.shape
    if m < n:
        raise RankDeficiencyError(f"need at least {n} records for {n} parameters, got {m}")
    norms = np.linalg.norm(a, axis=0)
    dead = np.flatnonzero(norms == 0.0)
    if dead.size:
        raise RankDeficiencyError(
            f"parameter {retained[dead[0]]} has an identically zero sensitivity column")
    scaled = a / norms
    q, r, piv = scipy.linalg.qr(scaled, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    bad = np.flatnonzero(diag < PIVOT_TOLERANCE * diag[0])
    if bad.size:
        names = ", ".join(retained[piv[k]] for k in bad)
        raise RankDeficiencyError(f"collinear parameters: {names}")
    r_inv = scipy.linalg.solve_triangular(r, np.eye(n))
    gram_inv_permuted = r_inv @ r_inv.T
    gram_inv = np.empty_like(gram_inv_permuted)
    gram_inv[np.ix_(piv, piv)] = gram_inv_permuted
    covariance = error_var * (gram_inv / np.outer(norms, norms))
    covariance = (covariance + covariance.T) / 2.0
    mean = np.array([model.parameter_value(name) for name in retained])
    frozen = {name: model.parameter_value(name)
              for name in model.parameter_names() if name not in retained}
    return GaussianParameterModel(retained, mean, covariance, frozen)


def _sampling_transform(model: GaussianParameterModel, repair: bool) -> np.ndarray:
    cov = model.covariance
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    eigenvalues, vectors = np.linalg.eigh(cov)
    most_negative = float(eigenvalues.min(initial=0.0))
    tolerance = PIVOT_TOLERANCE * max(float(np.trace(cov)), np.finfo(float).tiny)
    if most_negative < -tolerance and not repair:
        raise FactorizationError(
            f"covariance is not positive semi-definite (most negative eigenvalue "
            f"{most_negative:.6g}); pass repair to project onto the PSD cone",
            most_negative=most_negative)
    clipped = np.clip(eigenvalues, 0.0, None)
    if most_negative < -tolerance:
        repaired = (vectors * clipped) @ vectors.T
        correction = float(np.linalg.norm(cov - repaired))
        logger.warning("projected covariance onto the PSD cone; Frobenius correction %.6g",
                       correction)
    return vectors * np.sqrt(clipped)


def sample_parameters(model: GaussianParameterModel, n: int, seed: int = 0,
                      repair: bool = False) -> np.ndarray:
    """Draw n correlated Gaussian parameter samples, mean + L z per row.

    L is the lower Cholesky factor of the covariance; when the matrix is
    singular or carries round-off-negative eigenvalues within the tolerance,
    an eigenvalue square root (zero-clamped) stands in. Eigenvalues below
    -1e-10 of the trace raise unless ``repair`` projects onto the nearest
    PSD matrix (clipping, with the Frobenius correction logged).

    Chunked substreams keyed on (seed, chunk index) make the output
    deterministic and schedule independent.
    """
    check_int_at_least("n", n, 1)
    seed = check_seed("seed", seed)
    transform = _sampling_transform(model, repair)
    out = np.empty((n, model.dim))
    for chunk, start in enumerate(range(0, n, SAMPLE_CHUNK)):
        stop = min(start + SAMPLE_CHUNK, n)
        rng = np.random.default_rng([seed, chunk])
        z = rng.standard_normal((stop - start, model.dim))
        out[start:stop] = model.mean + z @ transform.T
    return out


def _dense_parameter_values(model: GaussianParameterModel) -> tuple[np.ndarray, float]:
    values = dict(zip(model.names, model.mean))
    values.update(model.frozen)
    if "C" not in values:
        raise DataError("parameter model does not define the constant C")
    constant = values.pop("C")
    degrees = []
    for name in values:
        if not (name.startswith("a") and name[1:].isdigit()):
            raise DataError(f"unrecognized parameter name {name!r}")
        degrees.append(int(name[1:]))
    dense = np.zeros(max(degrees) + 1) if degrees else np.zeros(1)
    for name, value in values.items():
        dense[int(name[1:])] = value
    return dense, float(constant)


def exponent_matrix(kind, base_coefficients, base_constant, names, matrix,
                    condition) -> np.ndarray:
    """log10 rupture time for a batch of parameter vectors at one condition.

    ``matrix`` columns follow ``names``; names 'a<k>' and 'C' override the
    base values, and the special names 'sigma' and 'T' override the
    condition, letting operating inputs join a sensitivity study.
    """
    kind = CreepModelKind.coerce(kind)
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    n_rows = matrix.shape[0]
    sigma0, temp0 = condition
    sigma = np.full(n_rows, float(sigma0))
    temp = np.full(n_rows, float(temp0))
    max_k = len(base_coefficients) - 1
    for name in names:
        if name.startswith("a") and name[1:].isdigit():
            max_k = max(max_k, int(name[1:]))
    coeffs = np.zeros((n_rows, max_k + 1))
    coeffs[:, : len(base_coefficients)] = np.asarray(base_coefficients, dtype=float)
    constant = np.full(n_rows, float(base_constant))
    for j, name in enumerate(names):
        column = matrix[:, j]
        if name == "sigma":
            sigma = column
        elif name == "T":
            temp = column
        elif name == "C":
            constant = column
        elif name.startswith("a") and name[1:].isdigit():
            coeffs[:, int(name[1:])] = column
        else:
            raise KeyError(f"unknown parameter name {name!r}")
    powers = sigma[:, None] ** np.arange(max_k + 1)
    p_values = np.einsum("ij,ij->i", coeffs, powers)
    return log10_time_exponent(kind, p_values, constant, temp)


def rupture_time_map(kind, model: FittedCreepModel, names, condition):
    """Vectorized rupture-time map over named parameters for sensitivity use.

    Returns a callable taking an (n, len(names)) matrix and returning t_r in
    hours, NaN where the exponent guard trips (counted as an evaluation
    failure by the sensitivity estimators).
    """
    base = np.asarray(model.law.coefficients, dtype=float)

    def evaluate(matrix):
        exponents = exponent_matrix(kind, base, model.constant, names, matrix, condition)
        out = np.where(np.abs(exponents) <= EXPONENT_LIMIT, 10.0 ** np.clip(
            exponents, -EXPONENT_LIMIT, EXPONENT_LIMIT), np.nan)
        return out

    return evaluate


def propagate(kind, gauss: GaussianParameterModel, condition, n: int = 10_000,
              seed: int = 0, repair: bool = False) -> RuptureTimeEnsemble:
    """Monte Carlo propagation of parameter uncertainty to the rupture time.

    Draws n parameter samples, evaluates the creep law of ``kind`` at the
    (stress, temperature) condition, and summarizes the valid samples with
    moment statistics and the equal-tailed 95% interval (2.5th/97.5th
    percentiles). Samples tripping the exponent guard are excluded and
    counted; more than 1% of them aborts.

    Raises
    ------
    EvaluationFailureError
        Overflow rate above 1%, or no valid sample at all.
    """
    kind = CreepModelKind.coerce(kind)
    condition = check_condition(*condition)
    check_int_at_least("n", n, 100)
    samples = sample_parameters(gauss, n, seed=seed, repair=repair)
    base_coeffs, base_constant = _dense_parameter_values(gauss)
    exponents = exponent_matrix(kind, base_coeffs, base_constant, gauss.names,
                                samples, condition)
    valid = np.abs(exponents) <= EXPONENT_LIMIT
    n_overflow = int(n - valid.sum())
    if n_overflow > MAX_OVERFLOW_RATE * n:
        raise EvaluationFailureError(
            f"{n_overflow} of {n} samples overflowed the rupture-time exponent (> 1%)")
    times = 10.0 ** exponents[valid]
    stats = SummaryStats.from_samples(times)
    ci = (percentile(times, 0.025), percentile(times, 0.975))
    return RuptureTimeEnsemble(samples=times, condition=condition, stats=stats,
                               ci95=ci, n_overflow=n_overflow)


def histogram(samples, bins: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width histogram on [min, max]; the right-most bin is closed.

    Identical samples collapse to a single degenerate bin instead of erroring.
    Returns (edges, counts) with len(edges) = len(counts) + 1.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("samples must be non-empty")
    check_int_at_least("bins", bins, 1)
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return np.array([lo, hi]), np.array([x.size])
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    return edges, counts
