"""Time-temperature-parameter creep laws.

Three classical parametric models are supported, each tying mechanical
stress, absolute temperature and rupture time together through an empirical
parameter P and a model constant C:

* Larson-Miller:    P = T * (C + log10 t_r)
* Orr-Sherby-Dorn:  P = log10 t_r - C / T
* Manson-Succop:    P = log10 t_r + C * T

Temperatures are kelvin, rupture times hours, logarithms base 10 throughout.
The predicted observable used for residuals, likelihoods and design-matrix
derivatives is log10 of the rupture time, so additive Gaussian noise on the
observable maps to multiplicative scatter on the time scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import OverflowRangeError
from .validation import check_positive_finite

EXPONENT_LIMIT = 300.0


class CreepModelKind(str, Enum):
    """The closed set of supported creep laws."""

    LARSON_MILLER = "larson_miller"
    ORR_SHERBY_DORN = "orr_sherby_dorn"
    MANSON_SUCCOP = "manson_succop"

    @classmethod
    def coerce(cls, value) -> "CreepModelKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown creep model kind {value!r}; expected one of {names}")


@dataclass(frozen=True)
class PolynomialLaw:
    """Polynomial stress law P(sigma) = a0 + a1*sigma + ... + a_{n-1}*sigma^(n-1).

    Coefficients are stored dense, lowest power first; trailing zeros are
    trimmed on construction so the degree is well defined (a single zero
    coefficient is allowed and represents the zero constant law).
    """

    coefficients: tuple[float, ...]

    def __init__(self, coefficients):
        coeffs = [float(c) for c in coefficients]
        if not coeffs:
            raise ValueError("PolynomialLaw needs at least one coefficient")
        if not all(np.isfinite(coeffs)):
            raise ValueError("PolynomialLaw coefficients must be finite")
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def active_powers(self) -> tuple[int, ...]:
        """Powers whose coefficient is nonzero."""
        return tuple(k for k, c in enumerate(self.coefficients) if c != 0.0)

    def coefficient_names(self) -> tuple[str, ...]:
        """Names 'a<k>' of the nonzero coefficients, ascending power."""
        return tuple(f"a{k}" for k in self.active_powers())

    def __call__(self, stress):
        """Evaluate P(sigma) by the Horner scheme; accepts scalars or arrays."""
        sigma = np.asarray(stress, dtype=float)
        acc = np.full_like(sigma, self.coefficients[-1])
        for c in reversed(self.coefficients[:-1]):
            acc = acc * sigma + c
        return float(acc) if np.ndim(stress) == 0 else acc


@dataclass(frozen=True)
class FittedCreepModel:
    """A creep law: which kind, the fitted P(sigma) polynomial, and C."""

    kind: CreepModelKind
    law: PolynomialLaw
    constant: float

    def __post_init__(self):
        object.__setattr__(self, "kind", CreepModelKind.coerce(self.kind))
        if not np.isfinite(self.constant):
            raise ValueError("model constant must be finite")
        if self.kind is CreepModelKind.LARSON_MILLER and self.constant <= 0:
            raise ValueError("Larson-Miller constant must be > 0")

    def parameter_names(self) -> tuple[str, ...]:
        """Active coefficient names followed by 'C'."""
        return self.law.coefficient_names() + ("C",)

    def parameter_value(self, name: str) -> float:
        if name == "C":
            return self.constant
        if name.startswith("a") and name[1:].isdigit():
            k = int(name[1:])
            if k <= self.law.degree:
                return self.law.coefficients[k]
        raise KeyError(f"unknown parameter name {name!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "coefficients": list(self.law.coefficients),
            "constant": self.constant,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FittedCreepModel":
        return cls(
            kind=CreepModelKind.coerce(payload["kind"]),
            law=PolynomialLaw(payload["coefficients"]),
            constant=float(payload["constant"]),
        )


def parameter_from_record(kind, record, constant: float) -> float:
    """Compute the creep parameter P for one rupture test.

    Parameters
    ----------
    kind : CreepModelKind or str
        Which law to apply.
    record : CreepRecord
        One (stress, temperature, rupture time) observation.
    constant : float
        The model constant C.

    Returns
    -------
    float
        P computed with log10 of rupture time in hours and T in kelvin.
    """
    kind = CreepModelKind.coerce(kind)
    log_tr = np.log10(record.rupture_time)
    t = record.temperature
    if kind is CreepModelKind.LARSON_MILLER:
        return t * (constant + log_tr)
    if kind is CreepModelKind.ORR_SHERBY_DORN:
        return log_tr - constant / t
    return log_tr + constant * t


def parameter_values(kind, dataset, constant: float) -> np.ndarray:
    """Vectorized :func:`parameter_from_record` over a whole dataset."""
    kind = CreepModelKind.coerce(kind)
    log_tr = np.log10(dataset.rupture_times())
    t = dataset.temperatures()
    if kind is CreepModelKind.LARSON_MILLER:
        return t * (constant + log_tr)
    if kind is CreepModelKind.ORR_SHERBY_DORN:
        return log_tr - constant / t
    return log_tr + constant * t


def log10_time_exponent(kind, p_value, constant, temperature):
    """Invert a creep law on the log scale: log10 t_r from P, C and T.

    All arguments broadcast, so sampled parameter vectors propagate in one
    call. No overflow guard is applied here; the result is an exponent.
    """
    kind = CreepModelKind.coerce(kind)
    p = np.asarray(p_value, dtype=float)
    c = np.asarray(constant, dtype=float)
    t = np.asarray(temperature, dtype=float)
    if kind is CreepModelKind.LARSON_MILLER:
        return p / t - c
    if kind is CreepModelKind.ORR_SHERBY_DORN:
        return p + c / t
    return p - c * t


def predicted_log10_time(model: FittedCreepModel, stress, temperature):
    """Model prediction of the observable log10 t_r at (stress, temperature)."""
    return log10_time_exponent(model.kind, model.law(stress), model.constant, temperature)


def rupture_time(kind, model: FittedCreepModel, stress: float, temperature: float) -> float:
    """Predicted rupture time in hours at one operating condition.

    Evaluates P(sigma), inverts the law of ``kind`` and exponentiates.
    Raises :class:`OverflowRangeError` when the base-10 exponent leaves
    [-300, 300], instead of silently returning inf/0 that would poison
    downstream moment statistics.
    """
    kind = CreepModelKind.coerce(kind)
    check_positive_finite("stress", stress)
    check_positive_finite("temperature", temperature)
    exponent = float(log10_time_exponent(kind, model.law(stress), model.constant, temperature))
    if not np.isfinite(exponent) or abs(exponent) > EXPONENT_LIMIT:
        raise OverflowRangeError(exponent)
    return float(10.0 ** exponent)


def predictor_partials(kind, model: FittedCreepModel, stress: float, temperature: float,
                       retained) -> np.ndarray:
    """Gradient of the predicted log10 t_r with respect to model parameters.

    Closed forms, per parameter name in ``retained``:

    =====================  ===========  ==========
    kind                   d/d a_k      d/d C
    =====================  ===========  ==========
    Larson-Miller          sigma^k / T  -1
    Orr-Sherby-Dorn        sigma^k      1 / T
    Manson-Succop          sigma^k      -T
    =====================  ===========  ==========

    Parameters
    ----------
    retained : sequence of str
        Parameter names, each 'a<k>' with k <= the law degree, or 'C'.

    Returns
    -------
    numpy.ndarray
        One entry per retained name, in order.
    """
    kind = CreepModelKind.coerce(kind)
    sigma = check_positive_finite("stress", stress)
    t = check_positive_finite("temperature", temperature)
    out = np.empty(len(retained), dtype=float)
    for j, name in enumerate(retained):
        if name == "C":
            if kind is CreepModelKind.LARSON_MILLER:
                out[j] = -1.0
            elif kind is CreepModelKind.ORR_SHERBY_DORN:
                out[j] = 1.0 / t
            else:
                out[j] = -t
            continue
        if not name.startswith("a"):
            raise KeyError(f"unknown parameter name {name!r}")
        try:
            k = int(name[1:])
        except ValueError:
            raise KeyError(f"unknown parameter name {name!r}")
        if k < 0 or k > model.law.degree:
            raise KeyError(f"parameter {name!r} outside the law's degree range")
        if kind is CreepModelKind.LARSON_MILLER:
            out[j] = sigma ** k / t
        else:
            out[j] = sigma ** k
    return out
