"""Polynomial stress-law fitting.

Sequential-threshold least squares (STLS) drives the sparsity: solve ordinary
least squares, zero every coefficient smaller in magnitude than the threshold,
refit on the surviving columns, repeat until the active set is stable.
Candidate polynomials of increasing degree compete through repeated shuffled
train/validation splits scored by RMSE, and the creep constant C is estimated
by a one-dimensional golden-section search wrapped around that cross-validation.

Solves go through a rank-revealing path (column equilibration + SVD/pivoted QR)
because raw stress powers up to sigma^8 span ~20 decades; normal equations
would be hopeless at that scaling.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from sklearn.exceptions import ConvergenceWarning

from .dataset import CreepDataset, WinsorSpec, winsorize
from .exceptions import BracketError, EmptyModelError, NumericError, RankDeficiencyError
from .models import CreepModelKind, FittedCreepModel, PolynomialLaw, parameter_values
from .validation import check_fraction, check_int_at_least, check_seed

RANK_TOL = 1e-10

DEFAULT_CONSTANT_BRACKETS = {
    CreepModelKind.LARSON_MILLER: (1.0, 40.0),
    CreepModelKind.ORR_SHERBY_DORN: (1e3, 1e5),
    CreepModelKind.MANSON_SUCCOP: (1e-3, 1e-1),
}


@dataclass(frozen=True)
class DesignMatrix:
    """Stress-power design matrix: row k holds sigma_k raised to each degree."""

    entries: np.ndarray
    column_degrees: tuple[int, ...]

    @classmethod
    def from_stresses(cls, stresses, degrees) -> "DesignMatrix":
        sigma = np.asarray(stresses, dtype=float)
        degrees = tuple(int(d) for d in degrees)
        entries = np.column_stack([sigma ** d for d in degrees])
        return cls(entries, degrees)

    @classmethod
    def vandermonde(cls, stresses, max_degree: int) -> "DesignMatrix":
        """Full basis 1, sigma, ..., sigma^max_degree."""
        return cls.from_stresses(stresses, range(max_degree + 1))

    def subset(self, positions) -> "DesignMatrix":
        positions = list(positions)
        return DesignMatrix(self.entries[:, positions],
                            tuple(self.column_degrees[p] for p in positions))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class StlsConfig:
    """Knobs of the sequential-threshold regression.

    Thresholding compares raw coefficient magnitudes against ``threshold``;
    with ``normalize_columns`` the comparison instead uses the coefficient of
    the unit-norm-column problem (coefficient times column norm), making the
    threshold scale free.
    """

    threshold: float
    max_degree: int = 8
    max_iterations: int = 20
    normalize_columns: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.threshold) and self.threshold > 0):
            raise ValueError(f"threshold must be > 0, got {self.threshold!r}")
        check_int_at_least("max_degree", self.max_degree, 1)
        check_int_at_least("max_iterations", self.max_iterations, 1)


@dataclass(frozen=True)
class CvCandidate:
    """One fitted candidate: shuffle iteration, basis degree, validation RMSE."""

    iteration: int
    degree: int
    rmse: float
    law: PolynomialLaw


@dataclass(frozen=True)
class CrossValReport:
    """Outcome of repeated shuffled-split cross-validation."""

    rmse_by_degree: dict[int, float]
    best: PolynomialLaw
    best_rmse: float
    iterations: int
    split_fraction: float
    candidates: tuple[CvCandidate, ...] = field(repr=False)
    skipped_iterations: int = 0

    def csv_rows(self):
        """Rows for the ``iteration,degree,rmse,selected`` CSV export."""
        yield ("iteration", "degree", "rmse", "selected")
        for cand in self.candidates:
            selected = int(cand.law == self.best and cand.rmse == self.best_rmse)
            yield (cand.iteration, cand.degree, repr(cand.rmse), selected)


def rmse(errors) -> float:
    """Root mean square of a vector of errors."""
    arr = np.asarray(errors, dtype=float)
    return float(np.sqrt(np.mean(arr ** 2)))


def _diagnose_dependent_column(scaled: np.ndarray, degrees) -> str:
    _, r, piv = scipy.linalg.qr(scaled, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    ref = diag[0] if diag.size and diag[0] > 0 else 1.0
    for k, d in enumerate(diag):
        if d < RANK_TOL * ref:
            return f"a{degrees[piv[k]]}"
    return f"a{degrees[piv[-1]]}"


def _solve(entries: np.ndarray, degrees, y: np.ndarray) -> np.ndarray:
    m, n = entries.shape
    if m < n:
        raise RankDeficiencyError(
            f"least squares needs at least {n} rows for {n} columns, got {m}")
    norms = np.linalg.norm(entries, axis=0)
    dead = np.flatnonzero(norms == 0.0)
    if dead.size:
        raise RankDeficiencyError(f"design column a{degrees[dead[0]]} is identically zero",
                                  offending=f"a{degrees[dead[0]]}")
    scaled = entries / norms
    solution, _, rank, _ = np.linalg.lstsq(scaled, y, rcond=RANK_TOL)
    if rank < n:
        name = _diagnose_dependent_column(scaled, degrees)
        raise RankDeficiencyError(
            f"design matrix is rank deficient (tolerance {RANK_TOL:g}): "
            f"column {name} is linearly dependent", offending=name)
    return solution / norms


def least_squares(design: DesignMatrix, y) -> np.ndarray:
    """Minimum-norm-free full-rank least squares solve.

    Parameters
    ----------
    design : DesignMatrix
    y : array-like, shape (m,)

    Returns
    -------
    numpy.ndarray
        Coefficients in column order, argmin of ||y - A x||_2.

    Raises
    ------
    RankDeficiencyError
        Fewer rows than columns, or a column numerically dependent below
        1e-10 relative to the largest singular value; the message names the
        offending column degree.
    """
    y = np.asarray(y, dtype=float)
    return _solve(design.entries, design.column_degrees, y)


def stls(design: DesignMatrix, y, cfg: StlsConfig) -> PolynomialLaw:
    """Sequential-threshold least squares on a stress-power design.

    Iterates: solve least squares on the active columns, drop every
    coefficient with magnitude below ``cfg.threshold``, refit; stops when the
    active set is stable or after ``cfg.max_iterations`` (then the current
    set is returned with a ConvergenceWarning, never an error). Thresholding
    acts on raw coefficient magnitudes.

    Returns
    -------
    PolynomialLaw
        Dense law with zeros at the deactivated powers.

    Raises
    ------
    EmptyModelError
        Every coefficient fell below the threshold.
    RankDeficiencyError
        Propagated from the inner solves.
    """
    y = np.asarray(y, dtype=float)
    active = list(range(len(design.column_degrees)))
    solution = np.empty(0)
    converged = False
    for _ in range(cfg.max_iterations):
        sub = design.subset(active)
        solution = _solve(sub.entries, sub.column_degrees, y)
        magnitudes = np.abs(solution)
        if cfg.normalize_columns:
            magnitudes = magnitudes * np.linalg.norm(sub.entries, axis=0)
        survives = magnitudes >= cfg.threshold
        if survives.all():
            converged = True
            break
        if not survives.any():
            raise EmptyModelError(
                f"threshold {cfg.threshold:g} removed every coefficient")
        active = [pos for pos, keep in zip(active, survives) if keep]
        solution = solution[survives]
    if not converged:
        warnings.warn("STLS active set still changing after "
                      f"{cfg.max_iterations} iterations", ConvergenceWarning)
    dense = np.zeros(max(design.column_degrees) + 1)
    for pos, coef in zip(active, solution):
        dense[design.column_degrees[pos]] = coef
    return PolynomialLaw(dense)


def _split_sizes(m: int, split: float) -> tuple[int, int]:
    n_val = int(round(split * m))
    n_val = min(max(n_val, 1), m - 2)
    return m - n_val, n_val


def cross_validate(stresses, response, cfg: StlsConfig, iterations: int = 100,
                   split: float = 0.2, seed: int = 0) -> CrossValReport:
    """Select the stress polynomial by repeated shuffled-split validation.

    For each of ``iterations`` shuffles the data splits into training and
    validation parts (``split`` is the validation fraction, default 20%).
    STLS candidates with basis degree 1..cfg.max_degree are fitted on the
    training part and scored by validation RMSE. The returned best law is the
    candidate with the global minimum RMSE over all (iteration, degree)
    pairs; ties within 1e-12 go to fewer nonzero coefficients, then to the
    lower basis degree. Deterministic for a fixed seed.

    ``rmse_by_degree`` aggregates the per-iteration errors per candidate
    degree as sqrt(mean(e_i^2)), each shuffle acting as one fold term.
    """
    sigma = np.asarray(stresses, dtype=float)
    y = np.asarray(response, dtype=float)
    if sigma.shape != y.shape or sigma.ndim != 1:
        raise ValueError("stresses and response must be 1-D arrays of equal length")
    split = check_fraction("split", split)
    iterations = check_int_at_least("iterations", iterations, 1)
    seed = check_seed("seed", seed)
    m = sigma.size
    if m < 3:
        raise ValueError("cross-validation needs at least 3 records")
    n_train, _ = _split_sizes(m, split)
    if n_train < 2:
        raise ValueError(f"training split of {n_train} records cannot support degree 1")

    candidates: list[CvCandidate] = []
    errors_by_degree: dict[int, list[float]] = {d: [] for d in range(1, cfg.max_degree + 1)}
    skipped = 0
    for it in range(iterations):
        rng = np.random.default_rng([seed, it])
        perm = rng.permutation(m)
        train, val = perm[: n_train], perm[n_train:]
        if np.unique(sigma[train]).size < 2:
            skipped += 1
            continue
        for degree in range(1, cfg.max_degree + 1):
            design = DesignMatrix.vandermonde(sigma[train], degree)
            try:
                law = stls(design, y[train], cfg)
            except (EmptyModelError, RankDeficiencyError):
                continue
            err = rmse(y[val] - law(sigma[val]))
            candidates.append(CvCandidate(it, degree, err, law))
            errors_by_degree[degree].append(err)
    if not candidates:
        raise NumericError("every cross-validation candidate failed")

    best = candidates[0]
    for cand in candidates[1:]:
        if _is_better(cand, best):
            best = cand
    rmse_by_degree = {d: rmse(errs) for d, errs in errors_by_degree.items() if errs}
    return CrossValReport(rmse_by_degree=rmse_by_degree, best=best.law,
                          best_rmse=best.rmse, iterations=iterations,
                          split_fraction=split, candidates=tuple(candidates),
                          skipped_iterations=skipped)


def _is_better(a: CvCandidate, b: CvCandidate) -> bool:
    if a.rmse < b.rmse - 1e-12:
        return True
    if a.rmse > b.rmse + 1e-12:
        return False
    ka = (len(a.law.active_powers()), a.degree, a.iteration)
    kb = (len(b.law.active_powers()), b.degree, b.iteration)
    return ka < kb


def _cv_objective(dataset: CreepDataset, kind: CreepModelKind, cfg: StlsConfig,
                  winsor: WinsorSpec | None, iterations: int, split: float, seed: int):
    sigma = dataset.stresses()

    def objective(constant: float) -> float:
        response = parameter_values(kind, dataset, constant)
        if winsor is not None:
            response = winsorize(response, winsor)
        report = cross_validate(sigma, response, cfg, iterations=iterations,
                                split=split, seed=seed)
        return min(report.rmse_by_degree.values())

    return objective


def _golden_section(fn, lo: float, hi: float, rel_tol: float = 1e-4) -> float:
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    tol = rel_tol * (hi - lo)
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    return (a + b) / 2.0


def fit_constant_and_law(dataset: CreepDataset, kind, cfg: StlsConfig, *,
                         bracket: tuple[float, float] | None = None,
                         cv_iterations: int = 100, split: float = 0.2, seed: int = 0,
                         winsor: WinsorSpec | None = None,
                         search_cv_iterations: int | None = None,
                         grid_points: int = 9) -> tuple[FittedCreepModel, CrossValReport]:
    """Jointly estimate the creep constant C and the stress polynomial.

    A coarse grid over the bracket locates a descent-ascent triple of the
    cross-validated RMSE objective; golden-section search refines the
    minimum inside it. The objective at a candidate C computes the creep
    parameter values, winsorizes them when a spec is given, and
    cross-validates the polynomial regression (a reduced iteration count,
    ``search_cv_iterations``, keeps the search affordable; the final law is
    refit at the optimum with the full ``cv_iterations``). Deterministic for
    a fixed seed.

    Returns
    -------
    (FittedCreepModel, CrossValReport)
        The model at the optimal C with its best law, and the full
        cross-validation report at that C.

    Raises
    ------
    BracketError
        The objective is monotone over the bracket (no interior minimum);
        the message carries the endpoint objective values.
    """
    kind = CreepModelKind.coerce(kind)
    lo, hi = bracket if bracket is not None else DEFAULT_CONSTANT_BRACKETS[kind]
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError(f"invalid constant bracket ({lo!r}, {hi!r})")
    if search_cv_iterations is None:
        search_cv_iterations = min(cv_iterations, 20)
    objective = _cv_objective(dataset, kind, cfg, winsor,
                              search_cv_iterations, split, seed)

    grid = np.linspace(lo, hi, check_int_at_least("grid_points", grid_points, 3))
    values = np.array([objective(c) for c in grid])
    k = int(np.argmin(values))
    if k == 0 or k == len(grid) - 1:
        raise BracketError(
            f"objective has no interior minimum on [{lo:g}, {hi:g}]: "
            f"f(lo)={values[0]:.6g}, f(hi)={values[-1]:.6g}")
    constant = _golden_section(objective, grid[k - 1], grid[k + 1])

    response = parameter_values(kind, dataset, constant)
    if winsor is not None:
        response = winsorize(response, winsor)
    report = cross_validate(dataset.stresses(), response, cfg,
                            iterations=cv_iterations, split=split, seed=seed)
    model = FittedCreepModel(kind=kind, law=report.best, constant=float(constant))
    return model, report
