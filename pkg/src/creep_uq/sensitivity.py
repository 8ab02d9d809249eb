"""Variance-based global sensitivity analysis under independent uniform inputs.

Two estimators of the first-order and total Sobol indices are provided: a
Saltelli pick-freeze Monte Carlo scheme with Jansen estimators, and a
regression-based polynomial chaos expansion on the tensorized orthonormal
Legendre basis whose coefficients give the indices in closed form.

Model callables are vectorized: they receive an (k, d) array of input points
and return k outputs. Non-finite outputs count as evaluation failures; a
failure rate above 1% of the design aborts the analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .exceptions import (DegenerateVarianceError, EvaluationFailureError,
                         UnderdeterminedError)
from .validation import check_int_at_least, check_seed

MAX_FAILURE_RATE = 0.01
MC_ESTIMATOR = "monte_carlo"
PCE_ESTIMATOR = "pce"
MC_INDEX_SLACK = 0.05


@dataclass(frozen=True)
class UniformInputSpec:
    """Independent uniform inputs: names and per-input (lower, upper) bounds."""

    names: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, names, lower, upper):
        names = tuple(str(n) for n in names)
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if len(set(names)) != len(names):
            raise ValueError("input names must be unique")
        if not (lower.shape == upper.shape == (len(names),)):
            raise ValueError("names, lower and upper must have matching lengths")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("bounds must be finite")
        if not np.all(lower < upper):
            bad = names[int(np.flatnonzero(~(lower < upper))[0])]
            raise ValueError(f"lower bound must be < upper bound for input {bad!r}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return len(self.names)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw n points uniformly inside the box."""
        u = rng.random((n, self.dim))
        return self.lower + u * (self.upper - self.lower)

    def to_unit(self, x: np.ndarray) -> np.ndarray:
        """Affinely map box points onto [-1, 1]^d."""
        return 2.0 * (x - self.lower) / (self.upper - self.lower) - 1.0


@dataclass(frozen=True)
class SobolReport:
    """First-order and total indices per input, from one estimator."""

    first_order: dict[str, float]
    total: dict[str, float]
    estimator: str
    sample_count: int
    n_failures: int = 0

    def __post_init__(self):
        if set(self.first_order) != set(self.total):
            raise ValueError("first_order and total must cover the same inputs")
        slack = MC_INDEX_SLACK if self.estimator == MC_ESTIMATOR else 1e-9
        for name, s in self.first_order.items():
            if not -slack <= s <= 1.0 + slack:
                raise ValueError(
                    f"first-order index for {name!r} out of range: {s}; the "
                    "estimate exceeds the noise tolerance, increase the sample size")
            if self.total[name] < s - slack:
                raise ValueError(f"total index for {name!r} below its first-order index")

    def csv_rows(self):
        """Rows for the ``parameter,first_order,total,estimator,samples`` export."""
        yield ("parameter", "first_order", "total", "estimator", "samples")
        for name in self.first_order:
            yield (name, repr(self.first_order[name]), repr(self.total[name]),
                   self.estimator, self.sample_count)


@dataclass(frozen=True)
class PceExpansion:
    """Truncated polynomial chaos expansion on the orthonormal Legendre basis."""

    coefficients: dict[tuple[int, ...], float]
    max_degree: int
    input_spec: UniformInputSpec
    n_samples: int = 0

    def variance(self) -> float:
        """Total variance: sum of squared non-constant coefficients."""
        return float(sum(c * c for idx, c in self.coefficients.items() if any(idx)))

    def mean(self) -> float:
        return self.coefficients.get((0,) * self.input_spec.dim, 0.0)


def _evaluate(model, points: np.ndarray) -> np.ndarray:
    out = np.asarray(model(points), dtype=float).reshape(-1)
    if out.shape[0] != points.shape[0]:
        raise ValueError("model must return one output per input row")
    return out


def sobol_mc(model, spec: UniformInputSpec, n: int = 10_000,
             seed: int = 0) -> SobolReport:
    """Sobol indices by Saltelli pick-freeze Monte Carlo with Jansen estimators.

    Draws two independent n-by-d matrices A and B and the d hybrid matrices
    A_B^(i) (column i of A replaced from B), for n*(d+2) model evaluations.
    First-order: S_i = 1 - mean((f_B - f_ABi)^2) / (2 V). Total:
    S_Ti = mean((f_A - f_ABi)^2) / (2 V). Deterministic for a fixed seed.

    Raises
    ------
    EvaluationFailureError
        More than 1% of design rows produced a non-finite output.
    DegenerateVarianceError
        The output variance over the design is zero.
    """
    check_int_at_least("n", n, 100)
    rng = np.random.default_rng(check_seed("seed", seed))
    a = spec.sample(n, rng)
    b = spec.sample(n, rng)
    f_a = _evaluate(model, a)
    f_b = _evaluate(model, b)
    f_mix = np.empty((spec.dim, n))
    for i in range(spec.dim):
        hybrid = a.copy()
        hybrid[:, i] = b[:, i]
        f_mix[i] = _evaluate(model, hybrid)

    valid = np.isfinite(f_a) & np.isfinite(f_b) & np.all(np.isfinite(f_mix), axis=0)
    n_failed = int(n - valid.sum())
    if n_failed > MAX_FAILURE_RATE * n:
        raise EvaluationFailureError(
            f"{n_failed} of {n} design rows failed to evaluate (> 1%)")
    f_a, f_b, f_mix = f_a[valid], f_b[valid], f_mix[:, valid]

    variance = float(np.var(np.concatenate([f_a, f_b]), ddof=1))
    if variance <= 0.0:
        raise DegenerateVarianceError("model output variance over the design is zero")

    first, total = {}, {}
    for i, name in enumerate(spec.names):
        first[name] = float(1.0 - np.mean((f_b - f_mix[i]) ** 2) / (2.0 * variance))
        total[name] = float(np.mean((f_a - f_mix[i]) ** 2) / (2.0 * variance))
    return SobolReport(first_order=first, total=total, estimator=MC_ESTIMATOR,
                       sample_count=n, n_failures=n_failed)


def total_degree_multi_indices(dim: int, max_degree: int) -> list[tuple[int, ...]]:
    """All multi-indices of total degree <= max_degree, graded lexicographic."""
    out: list[tuple[int, ...]] = []

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in compositions(total - head, parts - 1):
                yield (head,) + tail

    for degree in range(max_degree + 1):
        out.extend(sorted(compositions(degree, dim)))
    return out


def _legendre_table(z: np.ndarray, max_degree: int) -> np.ndarray:
    """Orthonormal Legendre values: table[..., k] = sqrt(2k+1) P_k(z)."""
    table = np.empty(z.shape + (max_degree + 1,))
    table[..., 0] = 1.0
    if max_degree >= 1:
        table[..., 1] = z
    for k in range(1, max_degree):
        table[..., k + 1] = ((2 * k + 1) * z * table[..., k] - k * table[..., k - 1]) / (k + 1)
    return table * np.sqrt(2.0 * np.arange(max_degree + 1) + 1.0)


def pce_basis_size(dim: int, max_degree: int) -> int:
    return comb(dim + max_degree, max_degree)


def pce_fit(model, spec: UniformInputSpec, n: int = 1_000, max_degree: int = 10,
            seed: int = 0) -> PceExpansion:
    """Fit a polynomial chaos expansion by ordinary least squares.

    Uniform pseudo-random points are drawn in the box (seeded), mapped onto
    [-1, 1]^d, and the model output is regressed on the tensorized
    orthonormal Legendre basis of total degree <= max_degree.

    Raises
    ------
    UnderdeterminedError
        Basis size exceeds half the sample budget.
    EvaluationFailureError
        More than 1% of sample points produced a non-finite output.
    """
    check_int_at_least("n", n, 2)
    check_int_at_least("max_degree", max_degree, 0)
    basis = pce_basis_size(spec.dim, max_degree)
    if basis > n / 2:
        raise UnderdeterminedError(
            f"basis of {basis} terms needs at least {2 * basis} samples, got {n}")
    rng = np.random.default_rng(check_seed("seed", seed))
    x = spec.sample(n, rng)
    y = _evaluate(model, x)
    valid = np.isfinite(y)
    n_failed = int(n - valid.sum())
    if n_failed > MAX_FAILURE_RATE * n:
        raise EvaluationFailureError(
            f"{n_failed} of {n} sample points failed to evaluate (> 1%)")
    x, y = x[valid], y[valid]

    indices = total_degree_multi_indices(spec.dim, max_degree)
    table = _legendre_table(spec.to_unit(x), max_degree)
    design = np.empty((x.shape[0], len(indices)))
    for col, alpha in enumerate(indices):
        design[:, col] = np.prod(table[:, range(spec.dim), alpha], axis=1)
    coeffs, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    return PceExpansion(coefficients=dict(zip(indices, map(float, coeffs))),
                        max_degree=max_degree, input_spec=spec, n_samples=n)


def sobol_from_pce(expansion: PceExpansion) -> SobolReport:
    """Sobol indices from PCE coefficients, exact over the stored expansion.

    Total variance D sums squared non-constant coefficients; the first-order
    partial variance of input i sums over multi-indices supported on i alone;
    the total index is one minus the share of multi-indices not involving i.
    """
    spec = expansion.input_spec
    d_total = expansion.variance()
    if d_total <= 0.0:
        raise DegenerateVarianceError("expansion has no non-constant term")
    first, total = {}, {}
    for i, name in enumerate(spec.names):
        d_i = sum(c * c for idx, c in expansion.coefficients.items()
                  if idx[i] > 0 and sum(idx) == idx[i])
        d_not_i = sum(c * c for idx, c in expansion.coefficients.items()
                      if any(idx) and idx[i] == 0)
        first[name] = min(max(d_i / d_total, 0.0), 1.0)
        total[name] = min(max(1.0 - d_not_i / d_total, 0.0), 1.0)
    count = expansion.n_samples if expansion.n_samples else len(expansion.coefficients)
    return SobolReport(first_order=first, total=total, estimator=PCE_ESTIMATOR,
                       sample_count=count)


def rank_parameters(report: SobolReport, total_threshold: float = 0.01,
                    names=None) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Split inputs into retained (random) and frozen (deterministic) sets.

    Inputs whose total index falls below ``total_threshold`` are frozen and
    treated as deterministic downstream. ``names`` restricts the decision to
    a subset (for example model parameters only, leaving operating-condition
    inputs out); order follows the report.

    Raises
    ------
    DegenerateVarianceError
        Every candidate parameter would be frozen.
    """
    if names is None:
        names = list(report.total)
    unknown = [n for n in names if n not in report.total]
    if unknown:
        raise KeyError(f"names not present in the report: {unknown}")
    retained = tuple(n for n in names if report.total[n] >= total_threshold)
    frozen = tuple(n for n in names if report.total[n] < total_threshold)
    if not retained:
        raise DegenerateVarianceError(
            f"total-index threshold {total_threshold:g} froze every parameter")
    return retained, frozen


def gaussian_input_box(names, means, std_errors, width: float = 3.0,
                       positive=()) -> UniformInputSpec:
    """Uniform box spanning mean +/- width standard errors per parameter.

    Parameters listed in ``positive`` must stay sign-definite: their lower
    bound is clipped to 1e-6 of the mean when the raw interval crosses zero.
    Zero standard errors degenerate the box, so a relative floor of 1e-9
    keeps every interval non-empty.
    """
    names = tuple(names)
    mu = np.asarray(means, dtype=float)
    se = np.asarray(std_errors, dtype=float)
    if not (mu.shape == se.shape == (len(names),)):
        raise ValueError("names, means and std_errors must have matching lengths")
    half = width * np.abs(se)
    floor = np.maximum(1e-9 * np.abs(mu), 1e-12)
    half = np.maximum(half, floor)
    lower = mu - half
    upper = mu + half
    for name in positive:
        i = names.index(name)
        if mu[i] <= 0:
            raise ValueError(f"parameter {name!r} must have a positive mean, got {mu[i]}")
        lower[i] = max(lower[i], 1e-6 * mu[i])
    return UniformInputSpec(names, lower, upper)
