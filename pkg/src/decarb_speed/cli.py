"""
Command-line interface

    decarb-speed report --input ssp_world.csv --out output
    decarb-speed fit --input ssp_world.csv --u-max 1.52
"""

import argparse
import logging
from pathlib import Path
from typing import List, Optional, Sequence

from .config import FORMATS, apply_overrides, configure_logging, load_settings
from .errors import DecarbError
from .report import STAGES, run_pipeline

logger = logging.getLogger(__name__)

STAGE_HELP = {
    'ingest': 'Validate and normalize the scenario file',
    'fit': 'Fit the decarbonization speed of every scenario',
    'stats': 'Ensemble statistics and bootstrap intervals',
    'lognormal': 'Lognormal fit and parametric bootstrap',
    'report': 'Run the full pipeline',
}


def _formats(value: str) -> List[str]:
    formats = [item.strip().lower() for item in value.split(',') if item.strip()]
    unknown = [item for item in formats if item not in FORMATS]
    if unknown or not formats:
        raise argparse.ArgumentTypeError(f"formats must be a comma list of {list(FORMATS)}, got {value!r}")
    return formats


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--input', '-i', type=Path, help='Wide scenario CSV (MODEL, SCENARIO, REGION, VARIABLE, UNIT, years)')
    common.add_argument('--config', '-c', type=Path, help='YAML settings file (default: config/config.yaml)')
    common.add_argument('--region', help='Region to analyse (default: World)')
    common.add_argument('--start-year', type=int, help='Reference year t0 (default: 2010)')
    common.add_argument('--time-unit-years', type=float, help='Years per unit of theta (default: 5)')
    common.add_argument('--u-max', type=float, help='Pin the maximum decarbonization rate instead of taking it from the data')
    common.add_argument('--seed', type=int, help='Base seed for bootstrap resampling (overrides DECARB_SEED)')
    common.add_argument('--bootstrap-samples', type=int, help='Number of bootstrap resamples (at least 1000)')
    common.add_argument('--workers', type=int, help='Threads for fitting and resampling')
    common.add_argument('--out', '-o', type=Path, help='Output directory (default: output)')
    common.add_argument('--format', type=_formats, help='Comma list of output formats: json,csv')
    common.add_argument('--log-level', help='Logging level (default: INFO)')

    parser = argparse.ArgumentParser(
        prog='decarb-speed',
        description='Decarbonization speed of climate mitigation scenarios',
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    for stage in STAGES:
        subparsers.add_parser(stage, parents=[common], help=STAGE_HELP[stage])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = load_settings(args.config)
        config = apply_overrides(config, {
            'input_path': args.input,
            'region': args.region,
            'start_year': args.start_year,
            'time_unit_years': args.time_unit_years,
            'u_max_override': args.u_max,
            'seed': args.seed,
            'bootstrap_samples': args.bootstrap_samples,
            'max_workers': args.workers,
            'output_dir': args.out,
            'formats': tuple(args.format) if args.format else None,
            'log_level': args.log_level,
        })
        configure_logging(config.log_level)

        report = run_pipeline(config, args.command)
    except DecarbError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return 1

    if report.dropped:
        logger.warning(f"{len(report.dropped)} scenario(s) dropped; see warnings.json")
    if report.estimates:
        logger.info(f"{len(report.estimates)} scenarios fitted, u_max = {report.u_max:.4f}")
    return 0


if __name__ == "__main__":
    exit(main())
