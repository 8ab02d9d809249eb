"""Creep rupture test records: ingestion, winsorization, synthetic data.

The on-disk format is a UTF-8 CSV with header ``stress_mpa,temperature,rupture_time_h``
and one test per line. Temperatures are stored internally in kelvin; ingestion
can convert from Celsius. All containers here are immutable once built.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .exceptions import DataError
from .models import CreepModelKind, PolynomialLaw, log10_time_exponent
from .validation import (check_finite_array, check_fraction, check_positive_finite,
                         check_seed)

CSV_HEADER = ("stress_mpa", "temperature", "rupture_time_h")
CELSIUS_OFFSET = 273.15


@dataclass(frozen=True)
class CreepRecord:
    """One rupture test: stress [MPa], absolute temperature [K], rupture time [h]."""

    stress: float
    temperature: float
    rupture_time: float

    def __post_init__(self):
        object.__setattr__(self, "stress", check_positive_finite("stress", self.stress))
        object.__setattr__(self, "temperature",
                           check_positive_finite("temperature", self.temperature))
        object.__setattr__(self, "rupture_time",
                           check_positive_finite("rupture_time", self.rupture_time))


@dataclass(frozen=True)
class CreepDataset:
    """An ordered, immutable collection of rupture tests."""

    records: tuple[CreepRecord, ...]
    source_label: str = ""

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        if len(records) < 2:
            raise DataError("a dataset needs at least 2 records")
        if len({r.stress for r in records}) < 2:
            raise DataError("a dataset needs at least 2 distinct stress values")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def stresses(self) -> np.ndarray:
        return np.array([r.stress for r in self.records])

    def temperatures(self) -> np.ndarray:
        return np.array([r.temperature for r in self.records])

    def rupture_times(self) -> np.ndarray:
        return np.array([r.rupture_time for r in self.records])


@dataclass(frozen=True)
class WinsorSpec:
    """Percentile pair bounding the winsorization clamp."""

    lower_percentile: float = 0.05
    upper_percentile: float = 0.95

    def __post_init__(self):
        check_fraction("lower_percentile", self.lower_percentile,
                       0.0, 0.5, inclusive_low=True)
        check_fraction("upper_percentile", self.upper_percentile,
                       0.5, 1.0, inclusive_high=True)
        if not self.lower_percentile < self.upper_percentile:
            raise ValueError("lower_percentile must be < upper_percentile")


def percentile(values, fraction: float) -> float:
    """Percentile with linear interpolation between closest ranks.

    Index h = (n - 1) * fraction on the sorted sample, interpolating between
    floor(h) and ceil(h) (the common "type 7" convention, numpy's default).
    """
    arr = check_finite_array("values", values)
    return float(np.quantile(arr, fraction, method="linear"))


def winsorize(values, spec: WinsorSpec) -> np.ndarray:
    """Clamp values outside the spec's percentile thresholds to the thresholds.

    Order and length are preserved; only magnitudes in the tails change.
    """
    arr = check_finite_array("values", values)
    lo = percentile(arr, spec.lower_percentile)
    hi = percentile(arr, spec.upper_percentile)
    return np.clip(arr, lo, hi)


def _convert_temperature(value: float, unit: str) -> float:
    if unit == "kelvin":
        return value
    if unit == "celsius":
        return value + CELSIUS_OFFSET
    raise DataError(f"temperature_unit must be 'celsius' or 'kelvin', got {unit!r}")


def _parse_rows(lines, where: str, temperature_unit: str) -> CreepDataset:
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{where}: empty file")
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise DataError(
            f"{where}: expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise DataError(f"{where}:{lineno}: expected 3 fields, got {len(row)}")
        try:
            stress, temp, time = (float(cell) for cell in row)
        except ValueError:
            raise DataError(f"{where}:{lineno}: non-numeric field in {row!r}")
        try:
            records.append(CreepRecord(stress, _convert_temperature(temp, temperature_unit), time))
        except DataError as exc:
            raise DataError(f"{where}:{lineno}: {exc}")
    if len(records) < 2:
        raise DataError(f"{where}: fewer than 2 usable records")
    try:
        return CreepDataset(tuple(records), source_label=where)
    except DataError as exc:
        raise DataError(f"{where}: {exc}")


def load_csv(path, temperature_unit: str = "kelvin") -> CreepDataset:
    """Read a creep dataset from a CSV file.

    Parameters
    ----------
    path : str or pathlib.Path
    temperature_unit : {'kelvin', 'celsius'}
        Unit of the temperature column; Celsius values are converted
        (K = degC + 273.15) on ingestion.

    Raises
    ------
    DataError
        Missing file, wrong header, malformed row (with line number),
        non-positive or non-finite field, or fewer than 2 usable records.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            return _parse_rows(handle, str(path), temperature_unit)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")


def loads_csv(text: str, temperature_unit: str = "kelvin",
              where: str = "<string>") -> CreepDataset:
    """Parse CSV text already in memory; same contract as :func:`load_csv`."""
    return _parse_rows(io.StringIO(text), where, temperature_unit)


def write_csv(dataset: CreepDataset, path) -> None:
    """Write a dataset back to CSV (kelvin, 12 significant digits).

    Inverse of :func:`load_csv` up to decimal-text precision.
    """
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in dataset:
            writer.writerow([format(v, ".12g") for v in (r.stress, r.temperature, r.rupture_time)])


def synthesize_dataset(truth_law: PolynomialLaw, constant: float, kind,
                       conditions, noise_sd: float = 0.0, seed: int = 0,
                       source_label: str = "synthetic") -> CreepDataset:
    """Generate a dataset from a known ground-truth creep model.

    For each (stress, temperature) condition the truth law is inverted to the
    exact log10 rupture time, Gaussian noise of standard deviation ``noise_sd``
    is added on the log scale, and the record stores 10**(noisy value).
    Deterministic for a fixed seed.
    """
    kind = CreepModelKind.coerce(kind)
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    conditions = list(conditions)
    if not conditions:
        raise ValueError("conditions must be non-empty")
    rng = np.random.default_rng(check_seed("seed", seed))
    records = []
    for stress, temperature in conditions:
        stress = check_positive_finite("stress", stress)
        temperature = check_positive_finite("temperature", temperature)
        exponent = float(log10_time_exponent(kind, truth_law(stress), constant, temperature))
        if not np.isfinite(exponent):
            raise DataError(f"truth model yields non-finite rupture time at "
                            f"({stress} MPa, {temperature} K)")
        noisy = exponent + (rng.normal(0.0, noise_sd) if noise_sd > 0 else 0.0)
        records.append(CreepRecord(stress, temperature, 10.0 ** noisy))
    return CreepDataset(tuple(records), source_label=source_label)
