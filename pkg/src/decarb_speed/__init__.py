"""
decarb_speed: decarbonization speed of climate mitigation scenarios
"""

from .config import RunConfig, load_settings
from .ensemble import bootstrap_ci, histogram, summary_stats
from .ingest import parse_scenario_csv, read_scenario_csv
from .intensity import carbon_intensity, decarb_rate, global_u_max
from .lognormal import lognormal_mle, lognormal_pdf, lognormal_stats, parametric_bootstrap
from .report import bucket_counts, run_pipeline, scatter_grid
from .speedfit import ambition_bucket, fit_objective, fit_theta, halving_time, synthesize_scenario

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "load_settings",
    "parse_scenario_csv",
    "read_scenario_csv",
    "carbon_intensity",
    "decarb_rate",
    "global_u_max",
    "fit_objective",
    "fit_theta",
    "halving_time",
    "ambition_bucket",
    "synthesize_scenario",
    "summary_stats",
    "histogram",
    "bootstrap_ci",
    "lognormal_mle",
    "lognormal_pdf",
    "lognormal_stats",
    "parametric_bootstrap",
    "bucket_counts",
    "scatter_grid",
    "run_pipeline",
]
