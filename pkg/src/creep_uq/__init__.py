"""Probabilistic creep remaining-useful-life toolkit.

Fits time-temperature-parameter creep laws to rupture data with sparse
polynomial regression, quantifies parameter influence with Sobol indices,
propagates Gaussian parameter uncertainty to the rupture-time distribution
by Monte Carlo, and ranks the candidate laws by information criteria.
"""

from .dataset import (CreepDataset, CreepRecord, WinsorSpec, load_csv, loads_csv,
                      percentile, synthesize_dataset, winsorize, write_csv)
from .estimator import CreepRuptureRegressor
from .exceptions import (BracketError, ComparabilityError, ConfigError, CreepUqError,
                         DataError, DegenerateVarianceError, DegreesOfFreedomError,
                         EmptyModelError, EvaluationFailureError, FactorizationError,
                         MissingArtifactError, NumericError, OverflowRangeError,
                         RankDeficiencyError, UnderdeterminedError)
from .models import (CreepModelKind, FittedCreepModel, PolynomialLaw,
                     parameter_from_record, parameter_values, predicted_log10_time,
                     predictor_partials, rupture_time)
from .propagation import (GaussianParameterModel, RuptureTimeEnsemble, SummaryStats,
                          error_variance, histogram, parameter_covariance, propagate,
                          rupture_time_map, sample_parameters)
from .regression import (CrossValReport, DesignMatrix, StlsConfig, cross_validate,
                         fit_constant_and_law, least_squares, rmse, stls)
from .selection import ModelScore, log_likelihood, rank, score
from .sensitivity import (PceExpansion, SobolReport, UniformInputSpec,
                          gaussian_input_box, pce_fit, rank_parameters,
                          sobol_from_pce, sobol_mc)

__version__ = "0.1.0"

__all__ = [
    "BracketError", "ComparabilityError", "ConfigError", "CreepDataset",
    "CreepModelKind", "CreepRecord", "CreepRuptureRegressor", "CreepUqError",
    "CrossValReport", "DataError", "DegenerateVarianceError",
    "DegreesOfFreedomError", "DesignMatrix", "EmptyModelError",
    "EvaluationFailureError", "FactorizationError", "FittedCreepModel",
    "GaussianParameterModel", "MissingArtifactError", "ModelScore",
    "NumericError", "OverflowRangeError", "PceExpansion", "PolynomialLaw",
    "RankDeficiencyError", "RuptureTimeEnsemble", "SobolReport", "StlsConfig",
    "SummaryStats", "UnderdeterminedError", "UniformInputSpec", "WinsorSpec",
    "cross_validate", "error_variance", "fit_constant_and_law",
    "gaussian_input_box", "histogram", "least_squares", "load_csv", "loads_csv",
    "log_likelihood", "parameter_covariance", "parameter_from_record",
    "parameter_values", "pce_fit", "percentile", "predicted_log10_time",
    "predictor_partials", "propagate", "rank", "rank_parameters", "rmse",
    "rupture_time", "rupture_time_map", "sample_parameters", "score",
    "sobol_from_pce", "sobol_mc", "stls", "synthesize_dataset", "winsorize",
    "write_csv",
]
