"""Configuration-driven orchestration of the full analysis pipeline.

Stages: ingest and fit the three creep laws, Sobol sensitivity of the
rupture-time map, Gaussian parameter modeling, Monte Carlo propagation at
the configured operating conditions, and AIC/BIC model selection. Each stage
reads the previous stage's files from the output directory, so the staged
subcommands compose to exactly the monolithic run. Every random draw flows
from explicitly configured seeds.
"""

from __future__ import annotations

import configparser
import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import CELSIUS_OFFSET, CreepDataset, WinsorSpec, load_csv
from .exceptions import (ConfigError, CreepUqError, MissingArtifactError,
                         UnderdeterminedError)
from .models import CreepModelKind, FittedCreepModel
from .propagation import (GaussianParameterModel, error_variance,
                          parameter_covariance, propagate, rupture_time_map)
from .regression import StlsConfig, fit_constant_and_law
from .selection import rank, score, score_csv_rows
from .sensitivity import (UniformInputSpec, gaussian_input_box, pce_basis_size,
                          pce_fit, rank_parameters, sobol_from_pce, sobol_mc)
from .svg import histogram_svg
from .validation import check_fraction, check_int_at_least, check_seed

logger = logging.getLogger(__name__)

KIND_SLUG = {
    CreepModelKind.LARSON_MILLER: "lm",
    CreepModelKind.ORR_SHERBY_DORN: "osd",
    CreepModelKind.MANSON_SUCCOP: "ms",
}
ALL_KINDS = tuple(KIND_SLUG)

DEFAULT_THRESHOLDS = {
    CreepModelKind.LARSON_MILLER: 0.01,
    CreepModelKind.ORR_SHERBY_DORN: 5e-6,
    CreepModelKind.MANSON_SUCCOP: 5e-6,
}


class StageError(CreepUqError):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    """Validated settings for one pipeline run; defaults follow the study setup."""

    input_path: Path
    output_dir: Path
    conditions: tuple[tuple[float, float], ...]
    temperature_unit: str = "kelvin"
    winsor_lower: float = 0.05
    winsor_upper: float = 0.95
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    max_degree: int = 8
    normalize_columns: bool = False
    cv_iterations: int = 100
    cv_split: float = 0.2
    search_cv_iterations: int = 20
    brackets: dict = field(default_factory=dict)
    fit_seed: int = 1
    n_mc: int = 10_000
    n_pce: int = 1_000
    pce_degree: int = 10
    freeze_threshold: float = 0.01
    bound_width: float = 3.0
    include_condition_inputs: bool = False
    sensitivity_seed: int = 2
    propagation_n: int = 10_000
    propagation_seed: int = 3
    histogram_bins: int = 50
    repair_covariance: bool = False
    threads: int | None = None
    entropy_seed: int | None = None

    def __post_init__(self):
        if not self.conditions:
            raise ConfigError("at least one operating condition is required")
        check_fraction("cv_split", self.cv_split)
        check_int_at_least("cv_iterations", self.cv_iterations, 1)
        check_int_at_least("max_degree", self.max_degree, 1)
        check_int_at_least("n_mc", self.n_mc, 100)
        check_int_at_least("n_pce", self.n_pce, 2)
        check_int_at_least("propagation_n", self.propagation_n, 100)
        check_int_at_least("histogram_bins", self.histogram_bins, 1)
        for name in ("fit_seed", "sensitivity_seed", "propagation_seed"):
            check_seed(name, getattr(self, name))
        for stress, temp in self.conditions:
            if stress <= 0 or temp <= 0:
                raise ConfigError(f"non-positive operating condition ({stress}, {temp})")

    def winsor_spec(self) -> WinsorSpec:
        return WinsorSpec(self.winsor_lower, self.winsor_upper)


def _get(parser, section, option, cast, default):
    if not parser.has_option(section, option):
        return default
    raw = parser.get(section, option)
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError:
        raise ConfigError(f"config [{section}] {option}: cannot parse {raw!r}")


def _parse_pair(raw: str, what: str) -> tuple[float, float]:
    parts = raw.replace(",", " ").split()
    if len(parts) != 2:
        raise ConfigError(f"{what}: expected two numbers, got {raw!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError(f"{what}: cannot parse {raw!r}")


def load_config(path, overrides: dict | None = None) -> PipelineConfig:
    """Parse an INI config file into a validated PipelineConfig.

    ``overrides`` (from CLI flags) replace file values: keys ``output_dir``,
    ``seed`` (re-derives every stage seed), ``threads``, ``repair_covariance``.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}")

    if not parser.has_option("input", "csv"):
        raise ConfigError("config needs [input] csv = <dataset path>")
    input_path = Path(parser.get("input", "csv"))
    if not input_path.is_absolute():
        input_path = path.parent / input_path

    unit = _get(parser, "input", "temperature_unit", str, "kelvin").strip().lower()
    if unit not in ("kelvin", "celsius"):
        raise ConfigError(f"temperature_unit must be kelvin or celsius, got {unit!r}")

    conditions = []
    if parser.has_section("conditions"):
        for key in parser.options("conditions"):
            stress, temp = _parse_pair(parser.get("conditions", key), f"condition {key!r}")
            if unit == "celsius":
                temp += CELSIUS_OFFSET
            conditions.append((stress, temp))
    if not conditions:
        raise ConfigError("config needs a [conditions] section with at least one entry")

    thresholds = dict(DEFAULT_THRESHOLDS)
    brackets = {}
    for kind, slug in KIND_SLUG.items():
        thresholds[kind] = _get(parser, "regression", f"lambda_{slug}", float,
                                thresholds[kind])
        if parser.has_option("regression", f"bracket_{slug}"):
            brackets[kind] = _parse_pair(parser.get("regression", f"bracket_{slug}"),
                                         f"bracket_{slug}")

    overrides = overrides or {}
    out_dir = overrides.get("output_dir") or _get(parser, "output", "dir", str, "out")
    out_dir = Path(out_dir)
    if not out_dir.is_absolute():
        out_dir = path.parent / out_dir

    fit_seed = _get(parser, "regression", "seed", int, 1)
    sens_seed = _get(parser, "sensitivity", "seed", int, 2)
    prop_seed = _get(parser, "propagation", "seed", int, 3)
    entropy_seed = None
    try:
        if overrides.get("seed") is not None:
            base = check_seed("seed", overrides["seed"])
            fit_seed, sens_seed, prop_seed = base + 1, base + 2, base + 3
        elif not any(parser.has_option(section, "seed")
                     for section in ("regression", "sensitivity", "propagation")):
            # fully unseeded run: draw from system entropy; the caller prints it
            entropy_seed = int(np.random.SeedSequence().entropy % (2 ** 31))
            base = entropy_seed
            fit_seed, sens_seed, prop_seed = base + 1, base + 2, base + 3
        threads = overrides.get("threads")
        if threads is not None:
            threads = check_int_at_least("threads", threads, 1)
        return PipelineConfig(
            input_path=input_path,
            output_dir=out_dir,
            conditions=tuple(conditions),
            temperature_unit=unit,
            winsor_lower=_get(parser, "preprocess", "winsor_lower", float, 0.05),
            winsor_upper=_get(parser, "preprocess", "winsor_upper", float, 0.95),
            thresholds=thresholds,
            max_degree=_get(parser, "regression", "max_degree", int, 8),
            normalize_columns=_get(parser, "regression", "normalize_columns",
                                   bool, False),
            cv_iterations=_get(parser, "regression", "cv_iterations", int, 100),
            cv_split=_get(parser, "regression", "cv_split", float, 0.2),
            search_cv_iterations=_get(parser, "regression", "search_cv_iterations", int, 20),
            brackets=brackets,
            fit_seed=fit_seed,
            n_mc=_get(parser, "sensitivity", "n_mc", int, 10_000),
            n_pce=_get(parser, "sensitivity", "n_pce", int, 1_000),
            pce_degree=_get(parser, "sensitivity", "pce_degree", int, 10),
            freeze_threshold=_get(parser, "sensitivity", "freeze_threshold", float, 0.01),
            bound_width=_get(parser, "sensitivity", "bound_width", float, 3.0),
            include_condition_inputs=_get(parser, "sensitivity", "include_conditions",
                                          bool, False),
            sensitivity_seed=sens_seed,
            propagation_n=_get(parser, "propagation", "n", int, 10_000),
            propagation_seed=prop_seed,
            histogram_bins=_get(parser, "propagation", "histogram_bins", int, 50),
            repair_covariance=bool(overrides.get("repair_covariance", False)),
            threads=threads,
            entropy_seed=entropy_seed,
        )
    except (ValueError, ConfigError) as exc:
        raise ConfigError(str(exc))


class _StageWriter:
    """Tracks files written by a stage; renames them to .partial on failure."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list[Path] = []

    def target(self, name: str) -> Path:
        path = self.out_dir / name
        self.written.append(path)
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self.target(name)
        path.write_text(text, encoding="utf-8")
        return path

    def write_json(self, name: str, payload: dict) -> Path:
        return self.write_text(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def write_rows(self, name: str, rows) -> Path:
        path = self.target(name)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            for row in rows:
                writer.writerow(row)
        return path

    def mark_partial(self):
        for path in self.written:
            if path.exists():
                path.rename(path.with_name(path.name + ".partial"))


def _run_stage(name: str, config: PipelineConfig, body) -> dict:
    config.output_dir.mkdir(parents=True, exist_ok=True)
    writer = _StageWriter(config.output_dir)
    try:
        return body(writer)
    except CreepUqError as exc:
        writer.mark_partial()
        raise StageError(name, exc)


def _load_dataset(config: PipelineConfig) -> CreepDataset:
    return load_csv(config.input_path, temperature_unit=config.temperature_unit)


def _read_json(path: Path) -> dict:
    if not path.is_file():
        raise MissingArtifactError(path)
    return json.loads(path.read_text(encoding="utf-8"))


def _model_path(config: PipelineConfig, kind: CreepModelKind) -> Path:
    return config.output_dir / f"model_{KIND_SLUG[kind]}.json"


def _gaussian_path(config: PipelineConfig, kind: CreepModelKind) -> Path:
    return config.output_dir / f"gaussian_{KIND_SLUG[kind]}.json"


def stage_fit(config: PipelineConfig) -> dict:
    """Fit all three creep laws; writes model_*.json and cv_*.csv."""

    def body(writer: _StageWriter):
        dataset = _load_dataset(config)
        models = {}
        for kind in ALL_KINDS:
            cfg = StlsConfig(threshold=config.thresholds[kind],
                             max_degree=config.max_degree,
                             normalize_columns=config.normalize_columns)
            model, report = fit_constant_and_law(
                dataset, kind, cfg,
                bracket=config.brackets.get(kind),
                cv_iterations=config.cv_iterations,
                split=config.cv_split,
                seed=config.fit_seed,
                winsor=config.winsor_spec(),
                search_cv_iterations=config.search_cv_iterations)
            slug = KIND_SLUG[kind]
            writer.write_json(f"model_{slug}.json", model.to_dict())
            writer.write_rows(f"cv_{slug}.csv", report.csv_rows())
            models[kind] = model
            logger.info("fit %s: law degree %d, constant %.6g",
                        slug, model.law.degree, model.constant)
        return {"models": models}

    return _run_stage("fit", config, body)


def _condition_bounds(values) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        # widen a point condition so the uniform input stays well defined
        span = 0.05 * abs(lo)
        lo, hi = lo - span, hi + span
    return lo, hi


def _fit_pce_with_degree_guard(map_fn, spec, n, degree, seed):
    while degree > 1 and pce_basis_size(spec.dim, degree) > n / 2:
        degree -= 1
    if pce_basis_size(spec.dim, degree) > n / 2:
        raise UnderdeterminedError(
            f"{n} samples cannot support even a degree-1 basis in {spec.dim} inputs")
    return pce_fit(map_fn, spec, n=n, max_degree=degree, seed=seed), degree


def stage_sensitivity(config: PipelineConfig) -> dict:
    """Sobol analysis per model; writes sobol_*_{mc,pce}.csv and gaussian_*.json."""

    def body(writer: _StageWriter):
        dataset = _load_dataset(config)
        gaussians = {}
        for kind_index, kind in enumerate(ALL_KINDS):
            slug = KIND_SLUG[kind]
            model = FittedCreepModel.from_dict(_read_json(_model_path(config, kind)))
            sigma_e2 = error_variance(dataset, model)
            names = model.parameter_names()
            full = parameter_covariance(dataset, model, names, sigma_e2)
            std_errors = np.sqrt(np.diag(full.covariance))
            positive = ("C",) if kind is CreepModelKind.LARSON_MILLER else ()
            box = gaussian_input_box(names, full.mean, std_errors,
                                     width=config.bound_width, positive=positive)
            box_names = list(box.names)
            lower = list(box.lower)
            upper = list(box.upper)
            if config.include_condition_inputs:
                s_lo, s_hi = _condition_bounds([c[0] for c in config.conditions])
                t_lo, t_hi = _condition_bounds([c[1] for c in config.conditions])
                box_names += ["sigma", "T"]
                lower += [s_lo, t_lo]
                upper += [s_hi, t_hi]
            spec = UniformInputSpec(box_names, lower, upper)
            map_fn = rupture_time_map(kind, model, spec.names, config.conditions[0])
            seed = config.sensitivity_seed + 10 * kind_index
            mc_report = sobol_mc(map_fn, spec, n=config.n_mc, seed=seed)
            expansion, used_degree = _fit_pce_with_degree_guard(
                map_fn, spec, config.n_pce, config.pce_degree, seed + 1)
            if used_degree != config.pce_degree:
                logger.info("%s: PCE degree reduced from %d to %d to stay determined",
                            slug, config.pce_degree, used_degree)
            pce_report = sobol_from_pce(expansion)
            writer.write_rows(f"sobol_{slug}_mc.csv", mc_report.csv_rows())
            writer.write_rows(f"sobol_{slug}_pce.csv", pce_report.csv_rows())
            retained, frozen_names = rank_parameters(
                mc_report, config.freeze_threshold, names=list(names))
            gauss = parameter_covariance(dataset, model, retained, sigma_e2)
            writer.write_json(f"gaussian_{slug}.json", gauss.to_dict())
            gaussians[kind] = gauss
            logger.info("%s: retained %s, frozen %s", slug, retained, frozen_names)
        return {"gaussians": gaussians}

    return _run_stage("sensitivity", config, body)


def _propagation_task(config, kind, gauss, cond_index):
    condition = config.conditions[cond_index]
    kind_index = ALL_KINDS.index(kind)
    seed = config.propagation_seed + 1000 * kind_index + cond_index
    return propagate(kind, gauss, condition, n=config.propagation_n, seed=seed,
                     repair=config.repair_covariance)


def stage_propagate(config: PipelineConfig) -> dict:
    """Monte Carlo ensembles per model and condition; CSV, stats and SVG out."""

    def body(writer: _StageWriter):
        dataset = _load_dataset(config)
        gaussians = {kind: GaussianParameterModel.from_dict(
            _read_json(_gaussian_path(config, kind))) for kind in ALL_KINDS}
        tasks = [(kind, j) for kind in ALL_KINDS for j in range(len(config.conditions))]
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            futures = {(kind, j): pool.submit(_propagation_task, config, kind,
                                              gaussians[kind], j)
                       for kind, j in tasks}
            ensembles = {key: fut.result() for key, fut in futures.items()}

        for kind in ALL_KINDS:
            slug = KIND_SLUG[kind]
            stats_rows = [("condition_stress", "condition_temp_K", "mean", "std", "cov",
                           "skewness", "excess_kurtosis", "ci95_lo", "ci95_hi",
                           "n_valid", "n_overflow")]
            for j, condition in enumerate(config.conditions):
                ensemble = ensembles[(kind, j)]
                tag = f"{slug}_c{j + 1}"
                writer.write_rows(
                    f"ensemble_{tag}.csv",
                    [("sample_index", "rupture_time_h")]
                    + [(i, repr(float(v))) for i, v in enumerate(ensemble.samples)])
                edges, counts = ensemble.histogram(config.histogram_bins)
                writer.write_rows(
                    f"hist_{tag}.csv",
                    [("bin_lo", "bin_hi", "count")]
                    + [(repr(float(edges[i])), repr(float(edges[i + 1])), int(c))
                       for i, c in enumerate(counts)])
                observed = [r.rupture_time for r in dataset
                            if np.isclose(r.stress, condition[0], rtol=1e-12)
                            and np.isclose(r.temperature, condition[1], rtol=1e-12)]
                svg = histogram_svg(
                    edges, counts,
                    title=f"{slug} rupture time, {condition[0]:g} MPa / {condition[1]:g} K",
                    x_label="rupture time [h]",
                    interval=ensemble.ci95, observed=observed)
                writer.write_text(f"hist_{tag}.svg", svg)
                s = ensemble.stats
                stats_rows.append((repr(condition[0]), repr(condition[1]),
                                   repr(s.mean), repr(s.std), repr(s.cov),
                                   repr(s.skewness), repr(s.excess_kurtosis),
                                   repr(ensemble.ci95[0]), repr(ensemble.ci95[1]),
                                   int(ensemble.samples.size), ensemble.n_overflow))
            writer.write_rows(f"stats_{slug}.csv", stats_rows)
        return {"ensembles": ensembles}

    return _run_stage("propagate", config, body)


def stage_select(config: PipelineConfig) -> dict:
    """Score and rank the three models; writes scores.csv and summary.txt."""

    def body(writer: _StageWriter):
        dataset = _load_dataset(config)
        scores = []
        for kind in ALL_KINDS:
            model = FittedCreepModel.from_dict(_read_json(_model_path(config, kind)))
            gauss = GaussianParameterModel.from_dict(
                _read_json(_gaussian_path(config, kind)))
            sigma_e2 = error_variance(dataset, model)
            scores.append(score(dataset, model, sigma_e2, n_params=gauss.dim))
        ranked = rank(scores)
        writer.write_rows("scores.csv", score_csv_rows(ranked))
        lines = [f"selected_model = {ranked[0].kind.value}", ""]
        for position, s in enumerate(ranked, start=1):
            lines.append(f"rank {position}: {s.kind.value}  "
                         f"aic={s.aic:.6g}  bic={s.bic:.6g}  "
                         f"lnL={s.log_likelihood:.6g}  n={s.n_params}  m={s.n_obs}")
        writer.write_text("summary.txt", "\n".join(lines) + "\n")
        return {"ranked": ranked, "selected": ranked[0].kind}

    return _run_stage("select", config, body)


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute fit, sensitivity, propagate and select in order."""
    result = {}
    result.update(stage_fit(config))
    result.update(stage_sensitivity(config))
    result.update(stage_propagate(config))
    result.update(stage_select(config))
    return result
