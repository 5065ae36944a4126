"""
Carbon intensity and decarbonization rate trajectories
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import EmptyEnsemble, IngestError, IntensityError, NonPositiveInitialIntensity
from .ingest import IngestWarning, ScenarioKey, ScenarioRecord, align_to_start_year

logger = logging.getLogger(__name__)

# Mt CO2 per EJ -> kg CO2 per kWh: 1e9 kg / (1e18 J / 3.6e6 J/kWh)
MT_PER_EJ_TO_KG_PER_KWH = 0.0036


@dataclass(frozen=True, eq=False)
class IntensityPath:
    """sigma in kgCO2/kWh from t0 onwards"""

    key: ScenarioKey
    years: np.ndarray
    sigma: np.ndarray
    t0: int

    @property
    def sigma0(self) -> float:
        return float(self.sigma[0])


@dataclass(frozen=True, eq=False)
class RatePath:
    """u(t) = 1 - sigma(t)/sigma(t0); zero at t0"""

    key: Optional[ScenarioKey]
    years: np.ndarray
    u: np.ndarray
    t0: int


@dataclass(frozen=True)
class UMax:
    """Ensemble maximum rate and where it occurs"""

    value: float
    key: ScenarioKey
    year: int


def carbon_intensity(record: ScenarioRecord, start_year: Optional[int] = None) -> IntensityPath:
    """
    Carbon intensity of a scenario

    Args:
        record: Scenario record
        start_year: t0; defaults to the first grid year

    Returns:
        IntensityPath on the grid at/after t0
    """
    t0 = record.years[0] if start_year is None else start_year
    if t0 not in record.years:
        raise IntensityError(f"start year {t0} not on grid", context=record.key.label)
    index = record.years.index(t0)

    years = np.asarray(record.years[index:], dtype=int)
    emissions = record.emissions_ffi.value_array()[index:]
    energy = record.primary_energy.value_array()[index:]
    sigma = emissions / energy * MT_PER_EJ_TO_KG_PER_KWH

    if not sigma[0] > 0:
        raise NonPositiveInitialIntensity(f"sigma({t0}) = {sigma[0]:.6g} kgCO2/kWh",
                                          context=record.key.label)
    return IntensityPath(key=record.key, years=years, sigma=sigma, t0=t0)


def decarb_rate(path: IntensityPath) -> RatePath:
    """Decarbonization rate relative to the start year"""
    if not path.sigma0 > 0:
        raise NonPositiveInitialIntensity(f"sigma({path.t0}) = {path.sigma0:.6g}",
                                          context=path.key.label)
    u = 1.0 - path.sigma / path.sigma0
    u[0] = 0.0
    return RatePath(key=path.key, years=path.years.copy(), u=u, t0=path.t0)


def global_u_max(rates: Sequence[RatePath]) -> UMax:
    """
    Largest decarbonization rate over all scenarios and years

    The first path (in input order) reaching the maximum is reported.
    """
    if not rates:
        raise EmptyEnsemble("no rate paths to take a maximum over")

    best: Optional[UMax] = None
    for rate in rates:
        index = int(np.argmax(rate.u))
        value = float(rate.u[index])
        if best is None or value > best.value:
            best = UMax(value=value, key=rate.key, year=int(rate.years[index]))

    logger.info(f"u_max = {best.value:.4f} attained by {best.key.label} in {best.year}")
    return best


def ensemble_paths(records: Sequence[ScenarioRecord],
                   start_year: int,
                   min_points: int = 6) -> Tuple[List[ScenarioRecord], List[IntensityPath], List[RatePath], List[IngestWarning]]:
    """
    Align every record and compute its intensity and rate paths

    Scenarios that cannot be aligned or have a non-positive start intensity
    are returned as warnings instead of failing the ensemble.

    Returns:
        (aligned records, intensity paths, rate paths, warnings), all in input order
    """
    aligned: List[ScenarioRecord] = []
    intensities: List[IntensityPath] = []
    rates: List[RatePath] = []
    warnings: List[IngestWarning] = []

    for record in records:
        try:
            record = align_to_start_year(record, start_year, min_points)
            path = carbon_intensity(record, start_year)
        except (IngestError, IntensityError) as e:
            logger.warning(f"Skipping {record.key.label}: {e}")
            warnings.append(IngestWarning(record.key.model, record.key.raw_name, str(e)))
            continue
        aligned.append(record)
        intensities.append(path)
        rates.append(decarb_rate(path))

    return aligned, intensities, rates, warnings


def load_reference_intensity(path: Union[str, Path]) -> List[Dict[str, object]]:
    """
    Read user-supplied historical intensity for overlays

    Args:
        path: CSV with columns region, year, sigma (kgCO2/kWh)

    Returns:
        Rows as dicts, sorted by region then year
    """
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as e:
        raise IngestError("reference file not found", context=str(path)) from e

    frame.columns = [str(column).strip().lower() for column in frame.columns]
    missing = {'region', 'year', 'sigma'} - set(frame.columns)
    if missing:
        raise IngestError(f"reference file lacks columns {sorted(missing)}", context=str(path))

    frame = frame[['region', 'year', 'sigma']].dropna().sort_values(['region', 'year'])
    return [
        {'region': str(row.region), 'year': int(row.year), 'sigma': float(row.sigma)}
        for row in frame.itertuples(index=False)
    ]
