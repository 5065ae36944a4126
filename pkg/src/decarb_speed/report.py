"""
End-to-end pipeline and report assembly

ingest -> intensity -> u_max -> per-scenario fit -> ensemble statistics and
bootstrap -> lognormal fit and parametric bootstrap -> output files.
"""

import logging
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .config import RunConfig
from .ensemble import (
    BenchmarkShares,
    BootstrapResult,
    EnsembleSummary,
    HalvingTimeRow,
    Histogram,
    benchmark_shares,
    bootstrap_ci,
    halving_time_table,
    histogram,
    summary_stats,
)
from .errors import ConfigError, FitError, NeverHalves
from .ingest import SSP, IngestWarning, ScenarioRecord, read_scenario_csv, table_to_frame, table_to_json
from .intensity import IntensityPath, RatePath, UMax, ensemble_paths, global_u_max, load_reference_intensity
from .lognormal import (
    ComparisonRow,
    LognormalFit,
    compare_with_empirical,
    density_curve,
    lognormal_mle,
    lognormal_stats,
    parametric_bootstrap,
)
from .speedfit import AmbitionBucket, FitTrajectory, ThetaEstimate, fit_ensemble, fit_trajectory
from .writers import write_csv, write_json, write_table

logger = logging.getLogger(__name__)

STAGES = ("ingest", "fit", "stats", "lognormal", "report")

ESTIMATE_COLUMNS = ['model', 'scenario', 'ssp', 'rcp', 'theta', 'objective', 'halving_years', 'bucket', 'converged']
BUCKET_COLUMNS = ['bucket', 'count', 'ssps', 'rcps', 'models']
HALVING_COLUMNS = ['statistic', 'theta', 'theta_lo', 'theta_hi', 'years', 'years_lo', 'years_hi']
COMPARISON_COLUMNS = ['statistic', 'empirical', 'empirical_lo', 'empirical_hi',
                      'lognormal', 'lognormal_lo', 'lognormal_hi']

SCATTER_SPACING = 0.1
SCATTER_HALF_WIDTH = 0.3


@dataclass(frozen=True)
class BucketRow:
    bucket: str
    count: int
    ssps: str
    rcps: str
    models: str


@dataclass(frozen=True)
class ScatterDatum:
    ssp_ordinal: int
    rcp_ordinal: int
    offset: float
    theta: float
    model: str
    scenario: str


@dataclass
class RunReport:
    """Everything a run produced, stage by stage"""

    stage: str
    records: List[ScenarioRecord] = field(default_factory=list)
    warnings: List[IngestWarning] = field(default_factory=list)
    intensities: List[IntensityPath] = field(default_factory=list)
    rates: List[RatePath] = field(default_factory=list)
    observed_u_max: Optional[UMax] = None
    u_max: Optional[float] = None
    estimates: List[ThetaEstimate] = field(default_factory=list)
    buckets: List[BucketRow] = field(default_factory=list)
    scatter: List[ScatterDatum] = field(default_factory=list)
    trajectories: List[FitTrajectory] = field(default_factory=list)
    summary: Optional[EnsembleSummary] = None
    histogram: Optional[Histogram] = None
    bootstrap: List[BootstrapResult] = field(default_factory=list)
    halving: List[HalvingTimeRow] = field(default_factory=list)
    benchmarks: Optional[BenchmarkShares] = None
    lognormal_fit: Optional[LognormalFit] = None
    parametric: List[BootstrapResult] = field(default_factory=list)
    comparison: List[ComparisonRow] = field(default_factory=list)
    density: Dict[str, List[float]] = field(default_factory=dict)
    written: List[Path] = field(default_factory=list)

    @property
    def dropped(self) -> List[IngestWarning]:
        return [warning for warning in self.warnings if warning.dropped]

    @property
    def notices(self) -> List[IngestWarning]:
        return [warning for warning in self.warnings if not warning.dropped]


def _join_tokens(prefix: str, tokens: Sequence[str]) -> str:
    """['RCP19', 'RCP26', 'Baseline'] -> 'RCP19/26/Baseline'"""
    if not tokens:
        return "n.a."
    parts = [tokens[0]] + [token[len(prefix):] if token.startswith(prefix) else token for token in tokens[1:]]
    return "/".join(parts)


def bucket_counts(estimates: Sequence[ThetaEstimate],
                  all_models: Optional[Sequence[str]] = None) -> List[BucketRow]:
    """
    Number of scenarios per ambition bucket, with the SSPs, RCPs and models present

    Args:
        estimates: Fitted estimates
        all_models: Models that make up "all"; defaults to the models in `estimates`

    Returns:
        Seven rows in bucket order
    """
    every_model = set(all_models) if all_models is not None else {e.key.model for e in estimates}
    grouped: Dict[AmbitionBucket, List[ThetaEstimate]] = defaultdict(list)
    for estimate in estimates:
        grouped[estimate.bucket].append(estimate)

    rows = []
    for bucket in AmbitionBucket:
        members = grouped.get(bucket, [])
        ssps = sorted({e.key.ssp for e in members}, key=lambda ssp: ssp.ordinal)
        rcps = sorted({e.key.rcp for e in members}, key=lambda rcp: rcp.ordinal)
        models = sorted({e.key.model for e in members})

        if not members:
            ssp_text = model_text = "n.a."
        else:
            ssp_text = "all" if len(ssps) == len(SSP) else _join_tokens("SSP", [s.value for s in ssps])
            model_text = "all" if set(models) >= every_model else "/".join(models)

        rows.append(BucketRow(
            bucket=bucket.value,
            count=len(members),
            ssps=ssp_text,
            rcps=_join_tokens("RCP", [r.value for r in rcps]),
            models=model_text,
        ))
    return rows


def scatter_grid(estimates: Sequence[ThetaEstimate]) -> List[ScatterDatum]:
    """
    SSP x RCP scatter positions; models sharing a cell are spread
    symmetrically around the cell centre in alphabetical order
    """
    cells: Dict[tuple, List[ThetaEstimate]] = defaultdict(list)
    for estimate in estimates:
        cells[(estimate.key.ssp.ordinal, estimate.key.rcp.ordinal)].append(estimate)

    data = []
    for (ssp_ordinal, rcp_ordinal), members in cells.items():
        members = sorted(members, key=lambda e: e.key.model)
        m = len(members)
        spacing = SCATTER_SPACING if m <= 7 else 2 * SCATTER_HALF_WIDTH / (m - 1)
        for k, estimate in enumerate(members):
            data.append(ScatterDatum(
                ssp_ordinal=ssp_ordinal,
                rcp_ordinal=rcp_ordinal,
                offset=(k - (m - 1) / 2) * spacing,
                theta=estimate.theta,
                model=estimate.key.model,
                scenario=estimate.key.raw_name,
            ))
    return sorted(data, key=lambda d: (d.ssp_ordinal, d.rcp_ordinal, d.model))


class DecarbPipeline:
    """
    Runs the analysis up to a given stage and writes its outputs
    """

    def __init__(self, config: RunConfig):
        if config.input_path is None:
            raise ConfigError("no input file given (use --input)")
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.formats = config.formats

    def run(self, stage: str = "report") -> RunReport:
        if stage not in STAGES:
            raise ConfigError(f"unknown stage {stage!r}; choose from {list(STAGES)}")
        report = RunReport(stage=stage)
        level = STAGES.index(stage)

        self._ingest(report)
        if level >= STAGES.index("fit"):
            self._fit(report)
        if level >= STAGES.index("stats"):
            self._statistics(report)
        if level >= STAGES.index("lognormal"):
            self._lognormal(report)

        self._write(report)
        logger.info(f"Stage '{stage}' finished: {len(report.written)} files in {self.output_dir}")
        return report

    # Stages

    def _ingest(self, report: RunReport) -> None:
        records, warnings = read_scenario_csv(self.config.input_path, self.config.ingest)
        report.records = records
        report.warnings = list(warnings)

    def _fit(self, report: RunReport) -> None:
        fit_config = self.config.fit
        records, intensities, rates, warnings = ensemble_paths(
            report.records, fit_config.start_year, fit_config.min_valid_points
        )
        report.warnings.extend(warnings)
        report.intensities, report.rates = intensities, rates

        report.observed_u_max = global_u_max(rates)
        report.u_max = self.config.u_max_override or report.observed_u_max.value
        if not report.u_max > 0.5:
            raise NeverHalves(f"u_max = {report.u_max:.4f} never halves the initial intensity; pass --u-max")
        if self.config.u_max_override:
            logger.info(f"Using u_max override {report.u_max} (observed {report.observed_u_max.value:.4f})")

        estimates, failed = fit_ensemble(records, report.u_max, fit_config)
        report.warnings.extend(failed)
        if not estimates:
            raise FitError(f"none of the {len(records)} scenarios could be fitted")
        report.estimates = estimates
        report.buckets = bucket_counts(estimates)
        report.scatter = scatter_grid(estimates)

        wanted = set(self.config.trajectory_scenarios)
        by_key = {record.key: record for record in records}
        report.trajectories = [
            fit_trajectory(by_key[estimate.key], estimate, fit_config)
            for estimate in estimates if estimate.key.name in wanted
        ]

    def _statistics(self, report: RunReport) -> None:
        settings = self.config.ensemble
        unit = self.config.fit.time_unit_years
        thetas = [estimate.theta for estimate in report.estimates]

        report.summary = summary_stats(thetas, report.u_max, unit)
        report.histogram = histogram(thetas, settings.histogram_bins)
        report.bootstrap = [
            bootstrap_ci(thetas, name, settings.bootstrap_samples, settings.seed, self.config.fit.max_workers)
            for name in settings.statistics
        ]
        report.halving = halving_time_table(report.summary, report.bootstrap, report.u_max, unit)
        report.benchmarks = benchmark_shares(report.estimates, settings.horizon_year,
                                             self.config.fit.start_year, settings.reference_halving_years)

    def _lognormal(self, report: RunReport) -> None:
        settings = self.config.lognormal
        ensemble = self.config.ensemble
        thetas = [estimate.theta for estimate in report.estimates]

        fit = lognormal_mle(thetas)
        report.lognormal_fit = fit
        sample_size = settings.sample_size or len(thetas)
        report.parametric = [
            parametric_bootstrap(fit, sample_size, ensemble.bootstrap_samples, name,
                                 ensemble.seed, self.config.fit.max_workers)
            for name in ensemble.statistics
        ]
        report.comparison = compare_with_empirical(report.summary, report.bootstrap, fit, report.parametric)
        x_max = settings.density_x_max or 1.5 * max(thetas)
        report.density = density_curve(fit, x_max, settings.density_points)

    # Output

    def _write(self, report: RunReport) -> None:
        out, formats = self.output_dir, self.formats
        written = report.written

        # each scenario is in estimates or under "warnings"; "notices" are kept scenarios
        written.append(write_json(out / "warnings.json", {
            'warnings': [asdict(warning) for warning in report.dropped],
            'notices': [asdict(warning) for warning in report.notices],
        }))

        if report.stage == "ingest":
            if 'csv' in formats:
                frame = table_to_frame(report.records, self.config.region, self.config.ingest)
                path = out / "scenarios.csv"
                path.parent.mkdir(parents=True, exist_ok=True)
                frame.to_csv(path, index=False, na_rep='')
                written.append(path)
            if 'json' in formats:
                written.append(write_json(out / "scenarios.json", table_to_json(report.records)))
            return

        written += write_table(out, "estimates", [e.as_row() for e in report.estimates], ESTIMATE_COLUMNS, formats)
        written.append(write_csv(out / "buckets.csv", [asdict(row) for row in report.buckets], BUCKET_COLUMNS))
        written.append(write_json(out / "scatter.json", {'points': [asdict(d) for d in report.scatter]}))
        written.append(write_json(out / "intensity.json", self._intensity_document(report)))
        written.append(write_json(out / "trajectories.json", {
            'trajectories': [
                {'model': t.key.model, 'scenario': t.key.raw_name, 'theta': t.theta, 'years': t.years,
                 'u': t.u, 'u_hat': t.u_hat, 'cumulative': t.cumulative, 'cumulative_hat': t.cumulative_hat}
                for t in report.trajectories
            ],
        }))

        if report.summary is not None:
            hist = report.histogram.as_dict()
            written.append(write_json(out / "summary.json", {
                'summary': report.summary.as_dict(),
                'bootstrap': [ci.as_dict() for ci in report.bootstrap],
                'histogram': hist,
                'u_max': self._u_max_document(report),
                'time_unit_years': self.config.fit.time_unit_years,
            }))
            written.append(write_json(out / "histogram.json", hist))
            written.append(write_json(out / "benchmarks.json", report.benchmarks.as_dict()))
            if 'csv' in formats:
                written.append(write_csv(out / "halving.csv", [asdict(row) for row in report.halving],
                                         HALVING_COLUMNS))

        if report.lognormal_fit is not None:
            written.append(write_json(out / "lognormal.json", {
                'fit': report.lognormal_fit.as_dict(),
                'stats': lognormal_stats(report.lognormal_fit),
                'bootstrap': [ci.as_dict() for ci in report.parametric],
                'density': report.density,
            }))
            if 'csv' in formats:
                written.append(write_csv(out / "comparison.csv", [asdict(row) for row in report.comparison],
                                         COMPARISON_COLUMNS))

    def _u_max_document(self, report: RunReport) -> Dict[str, Any]:
        observed = report.observed_u_max
        return {
            'value': report.u_max,
            'observed': observed.value,
            'model': observed.key.model,
            'scenario': observed.key.raw_name,
            'year': observed.year,
            'overridden': self.config.u_max_override is not None,
        }

    def _intensity_document(self, report: RunReport) -> Dict[str, Any]:
        reference = load_reference_intensity(self.config.reference_path) if self.config.reference_path else []
        return {
            'start_year': self.config.fit.start_year,
            'u_max': self._u_max_document(report),
            'paths': [
                {'model': path.key.model, 'scenario': path.key.raw_name, 'years': path.years,
                 'sigma': path.sigma, 'u': rate.u}
                for path, rate in zip(report.intensities, report.rates)
            ],
            'reference': reference,
        }


def run_pipeline(config: RunConfig, stage: str = "report") -> RunReport:
    """Run the full analysis (or up to `stage`) and write its outputs"""
    return DecarbPipeline(config).run(stage)
