from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np
import pytest

from decarb_speed.config import FitConfig
from decarb_speed.ingest import RCP, SSP, AnnualSeries, ScenarioKey, ScenarioRecord, table_to_csv
from decarb_speed.speedfit import synthesize_scenario

DECADAL_YEARS = list(range(2010, 2101, 10))
EMISSIONS = "Emissions|CO2|Fossil Fuels and Industry"
ENERGY = "Primary Energy"
HEADER = "Model,Scenario,Region,Variable,Unit," + ",".join(str(y) for y in [2005] + DECADAL_YEARS)


def make_key(model: str = "GCAM4", ssp: SSP = SSP.SSP2, rcp: RCP = RCP.RCP45) -> ScenarioKey:
    return ScenarioKey(model=model, ssp=ssp, rcp=rcp, raw_name=f"{ssp.value}-{rcp.token}")


def make_record(theta: float, u_max: float = 1.52, sigma0: float = 0.24,
                energy: Optional[Sequence[float]] = None,
                key: Optional[ScenarioKey] = None,
                years: Sequence[int] = DECADAL_YEARS) -> ScenarioRecord:
    if energy is None:
        energy = [520.0 + 10.0 * k for k in range(len(years))]
    path = AnnualSeries.from_arrays(years, energy, "EJ/yr")
    return synthesize_scenario(theta, u_max, sigma0, path, FitConfig(), key=key or make_key())


def csv_row(model: str, scenario: str, variable: str, unit: str, values: Sequence[str],
            region: str = "World") -> str:
    return ",".join([model, scenario, region, variable, unit, *values])


@pytest.fixture
def record_factory() -> Callable[..., ScenarioRecord]:
    return make_record


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240814)


@pytest.fixture
def ensemble_records() -> List[ScenarioRecord]:
    """Three models over every SSP with a spread of speeds"""
    speeds = {RCP.RCP19: 0.5, RCP.RCP26: 0.3, RCP.RCP45: 0.15, RCP.BASELINE: 0.04}
    records = []
    for m, model in enumerate(["GCAM4", "IMAGE", "REMIND-MAGPIE"]):
        for ssp in SSP:
            for rcp, theta in speeds.items():
                scale = 1.0 + 0.05 * m + 0.02 * ssp.ordinal
                records.append(make_record(theta * scale, key=make_key(model, ssp, rcp)))
    return records


@pytest.fixture
def ensemble_csv(tmp_path: Path, ensemble_records: List[ScenarioRecord]) -> Path:
    path = tmp_path / "ensemble.csv"
    path.write_text(table_to_csv(ensemble_records), encoding="utf-8")
    return path


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    """Small, fast settings for pipeline runs"""
    path = tmp_path / "config.yaml"
    path.write_text(
        "ingest:\n"
        "  region: World\n"
        "  start_year: 2010\n"
        "fit:\n"
        "  max_workers: 2\n"
        "ensemble:\n"
        "  seed: 11\n"
        "  bootstrap_samples: 1000\n"
        "report:\n"
        "  trajectory_scenarios: [SSP1-19, SSP3-Baseline]\n",
        encoding="utf-8",
    )
    return path
