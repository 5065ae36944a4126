"""
Synthetic SSP-shaped scenario ensemble for demos and smoke runs

Writes a wide CSV (MODEL, SCENARIO, REGION, VARIABLE, UNIT, 2010 ... 2100)
whose decarbonization rate paths follow the saturating model with a known
speed per scenario, optionally with multiplicative noise on emissions.

    python data/generator.py --output data/ssp_synthetic.csv --seed 7
"""

import argparse
import logging

import numpy as np

from decarb_speed.config import FitConfig, configure_logging
from decarb_speed.ingest import RCP, SSP, AnnualSeries, ScenarioKey, ScenarioRecord, table_to_csv
from decarb_speed.speedfit import synthesize_scenario

logger = logging.getLogger(__name__)

YEARS = [2010, 2020, 2030, 2040, 2050, 2060, 2070, 2080, 2090, 2100]

MODELS = ["AIM/CGE", "GCAM4", "IMAGE", "MESSAGE-GLOBIOM", "REMIND-MAGPIE", "WITCH-GLOBIOM"]

# Primary energy growth per decade (EJ/yr starts near 520)
ENERGY_GROWTH = {
    SSP.SSP1: 0.01,
    SSP.SSP2: 0.06,
    SSP.SSP3: 0.07,
    SSP.SSP4: 0.04,
    SSP.SSP5: 0.12,
}

# Typical speed per 5 years
RCP_SPEED = {
    RCP.RCP19: 0.60,
    RCP.RCP26: 0.40,
    RCP.RCP34: 0.28,
    RCP.RCP45: 0.18,
    RCP.RCP60: 0.10,
    RCP.BASELINE: 0.04,
}

# Combinations that do not solve in the public database
INFEASIBLE = {(SSP.SSP3, RCP.RCP19), (SSP.SSP3, RCP.RCP26), (SSP.SSP5, RCP.RCP19)}


def generate_record(model: str, ssp: SSP, rcp: RCP, rng: np.random.Generator,
                    u_max: float, noise: float, config: FitConfig) -> ScenarioRecord:
    decades = np.arange(len(YEARS))
    energy = 520.0 * rng.uniform(0.95, 1.05) * (1.0 + ENERGY_GROWTH[ssp]) ** decades
    theta = RCP_SPEED[rcp] * rng.lognormal(0.0, 0.25)
    sigma0 = rng.uniform(0.23, 0.27)

    key = ScenarioKey(model=model, ssp=ssp, rcp=rcp, raw_name=f"{ssp.value}-{rcp.token}")
    record = synthesize_scenario(theta, u_max, sigma0, AnnualSeries.from_arrays(YEARS, energy, "EJ/yr"),
                                 config, key=key)
    if noise > 0:
        emissions = np.asarray(record.emissions_ffi.values)
        emissions = emissions * (1.0 + rng.normal(0.0, noise, size=emissions.size))
        emissions[0] = record.emissions_ffi.values[0]
        record = ScenarioRecord(key, AnnualSeries.from_arrays(YEARS, emissions, "Mt CO2/yr"),
                                record.primary_energy)
    return record


def main():
    parser = argparse.ArgumentParser(description='Generate a synthetic SSP scenario ensemble CSV')
    parser.add_argument('--output', '-o',
                        default='data/ssp_synthetic.csv',
                        help='Output CSV path (default: data/ssp_synthetic.csv)')
    parser.add_argument('--seed', '-s',
                        type=int, default=7,
                        help='Random seed')
    parser.add_argument('--u-max',
                        type=float, default=1.52,
                        help='Asymptotic decarbonization rate of every scenario')
    parser.add_argument('--noise', '-n',
                        type=float, default=0.0,
                        help='Relative std of multiplicative noise on emissions')
    args = parser.parse_args()

    configure_logging()
    rng = np.random.default_rng(args.seed)
    config = FitConfig()

    records = [
        generate_record(model, ssp, rcp, rng, args.u_max, args.noise, config)
        for model in MODELS
        for ssp in SSP
        for rcp in RCP
        if (ssp, rcp) not in INFEASIBLE
    ]

    with open(args.output, 'w', encoding='utf-8', newline='') as file:
        file.write(table_to_csv(records))
    logger.info(f"Wrote {len(records)} scenarios to {args.output}")
    return 0


if __name__ == "__main__":
    exit(main())
