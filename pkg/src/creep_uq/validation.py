"""Input validation helpers shared across the library.

Small check functions in the spirit of scikit-learn's ``check_array``: each
either returns a normalized value or raises :class:`~creep_uq.exceptions.DataError`
/ :class:`ValueError` with a message naming the offending argument.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DataError


def check_positive_finite(name: str, value: float) -> float:
    """Return ``value`` as float; require it finite and > 0."""
    v = float(value)
    if not np.isfinite(v):
        raise DataError(f"{name} must be finite, got {value!r}")
    if v <= 0.0:
        raise DataError(f"{name} must be > 0, got {value!r}")
    return v


def check_finite_array(name: str, values) -> np.ndarray:
    """Return a 1-D float array; require non-empty and all entries finite."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise DataError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise DataError(f"{name} contains a non-finite entry at index {bad}")
    return arr


def check_fraction(name: str, value: float, low: float = 0.0, high: float = 1.0,
                   inclusive_low: bool = False, inclusive_high: bool = False) -> float:
    """Return ``value`` as float, checked against an open/closed interval."""
    v = float(value)
    ok_low = v >= low if inclusive_low else v > low
    ok_high = v <= high if inclusive_high else v < high
    if not (np.isfinite(v) and ok_low and ok_high):
        lo_b = "[" if inclusive_low else "("
        hi_b = "]" if inclusive_high else ")"
        raise ValueError(f"{name} must lie in {lo_b}{low}, {high}{hi_b}, got {value!r}")
    return v


def check_int_at_least(name: str, value: int, minimum: int) -> int:
    """Return ``value`` as int; require value >= minimum."""
    v = int(value)
    if v != value or v < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return v


def check_seed(name: str, value: int) -> int:
    """Return ``value`` as int; RNG seeds must be non-negative integers."""
    v = int(value)
    if v != value or v < 0:
        raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
    return v


def check_condition(stress: float, temperature: float) -> tuple[float, float]:
    """Validate one (stress MPa, temperature K) operating condition."""
    return (check_positive_finite("stress", stress),
            check_positive_finite("temperature", temperature))
