"""
Decarbonization speed fitting

Each scenario's rate path is summarized by a single speed theta in the
saturating model u(t) = u_max * (1 - exp(-theta * tau)), tau = (year - t0) / time unit.
Theta is chosen so the reconstructed cumulative emissions match the
scenario's own cumulative emissions as closely as possible.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .config import FitConfig
from .errors import DecarbError, DegenerateCumulative, FitError, NeverHalves, StartYearMissing
from .ingest import (
    RCP,
    SSP,
    AnnualSeries,
    IngestWarning,
    ScenarioKey,
    ScenarioRecord,
    align_to_start_year,
)
from .intensity import MT_PER_EJ_TO_KG_PER_KWH, RatePath, carbon_intensity, decarb_rate

logger = logging.getLogger(__name__)

_INV_PHI = (math.sqrt(5) - 1) / 2

SYNTHETIC_KEY = ScenarioKey(model="SYNTHETIC", ssp=SSP.SSP2, rcp=RCP.RCP45, raw_name="SSP2-45")


class AmbitionBucket(str, Enum):
    """Years-to-halve classes; each covers (lower, upper]"""

    UNDER_10 = "<10"
    FROM_10_TO_20 = "(10,20]"
    FROM_20_TO_30 = "(20,30]"
    FROM_30_TO_40 = "(30,40]"
    FROM_40_TO_50 = "(40,50]"
    FROM_50_TO_90 = "(50,90]"
    OVER_90 = ">90"

    @property
    def bounds(self) -> Tuple[float, float]:
        return _BUCKET_BOUNDS[self]


_BUCKET_BOUNDS = {
    AmbitionBucket.UNDER_10: (0.0, 10.0),
    AmbitionBucket.FROM_10_TO_20: (10.0, 20.0),
    AmbitionBucket.FROM_20_TO_30: (20.0, 30.0),
    AmbitionBucket.FROM_30_TO_40: (30.0, 40.0),
    AmbitionBucket.FROM_40_TO_50: (40.0, 50.0),
    AmbitionBucket.FROM_50_TO_90: (50.0, 90.0),
    AmbitionBucket.OVER_90: (90.0, math.inf),
}


@dataclass(frozen=True)
class ThetaEstimate:
    key: ScenarioKey
    theta: float
    objective: float
    halving_years: float
    u_max_used: float
    converged: bool
    time_unit_years: float = 5.0
    excluded_points: int = 0

    @property
    def bucket(self) -> AmbitionBucket:
        return ambition_bucket(self.halving_years)

    def as_row(self) -> Dict[str, Any]:
        return {
            'model': self.key.model,
            'scenario': self.key.raw_name,
            'ssp': self.key.ssp.value,
            'rcp': self.key.rcp.value,
            'theta': self.theta,
            'objective': self.objective,
            'halving_years': self.halving_years,
            'bucket': self.bucket.value,
            'converged': self.converged,
        }


@dataclass(frozen=True, eq=False)
class FitTrajectory:
    """Observed vs reconstructed paths for one fitted scenario"""

    key: ScenarioKey
    theta: float
    years: np.ndarray
    u: np.ndarray
    u_hat: np.ndarray
    cumulative: np.ndarray
    cumulative_hat: np.ndarray


def _tau(years: np.ndarray, t0: int, time_unit_years: float) -> np.ndarray:
    return (np.asarray(years, dtype=float) - t0) / time_unit_years


def _saturating_rate(thetas: np.ndarray, tau: np.ndarray, u_max: float) -> np.ndarray:
    return u_max * (1.0 - np.exp(-np.multiply.outer(thetas, tau)))


def _emissions_from_rate(u: np.ndarray, sigma0: float, energy: np.ndarray) -> np.ndarray:
    """Mt CO2/yr from a rate path and the scenario's own primary energy"""
    return sigma0 * (1.0 - u) * energy / MT_PER_EJ_TO_KG_PER_KWH


def reconstruct_rate(theta: float, u_max: float, years: Sequence[int], t0: int,
                     time_unit_years: float, key: Optional[ScenarioKey] = None) -> RatePath:
    """Rate path of the saturating model on a year grid"""
    if not theta > 0 or not u_max > 0:
        raise FitError(f"theta and u_max must be positive (theta={theta}, u_max={u_max})")
    years = np.asarray(years, dtype=int)
    u = _saturating_rate(np.float64(theta), _tau(years, t0, time_unit_years), u_max)
    return RatePath(key=key, years=years, u=u, t0=t0)


def reconstruct_emissions(theta: float, u_max: float, record: ScenarioRecord, sigma0: float,
                          config: Optional[FitConfig] = None) -> AnnualSeries:
    """
    Emissions implied by theta on the scenario's grid from the start year

    Reconstructed intensity sigma0 * (1 - u) times the scenario's primary energy,
    converted back to Mt CO2/yr.
    """
    config = config or FitConfig()
    record = align_to_start_year(record, config.start_year, config.min_valid_points)
    rate = reconstruct_rate(theta, u_max, record.years, config.start_year, config.time_unit_years)
    values = _emissions_from_rate(rate.u, sigma0, record.primary_energy.value_array())
    return AnnualSeries.from_arrays(record.years, values, "Mt CO2/yr")


def cumulative_emissions(series: AnnualSeries) -> AnnualSeries:
    """Trapezoid-rule running total over the actual year gaps; zero at the first year"""
    totals = cumulative_trapezoid(series.value_array(), series.year_array(), initial=0.0)
    return AnnualSeries.from_arrays(series.years, totals, "Mt CO2")


class CumulativeObjective:
    """
    Mean |1 - CE_hat/CE| over grid points after t0

    Points whose original cumulative emissions are within
    exclusion_rel_tol * max|CE| of zero are left out and counted.
    """

    def __init__(self, record: ScenarioRecord, u_max: float, config: FitConfig):
        self.config = config
        self.u_max = u_max
        self.record = align_to_start_year(record, config.start_year, config.min_valid_points)
        self.sigma0 = carbon_intensity(self.record, config.start_year).sigma0

        self.years = self.record.emissions_ffi.year_array()
        self.energy = self.record.primary_energy.value_array()
        self.tau = _tau(self.years, config.start_year, config.time_unit_years)
        self.cumulative = cumulative_emissions(self.record.emissions_ffi).value_array()

        later = self.cumulative[1:]
        scale = float(np.max(np.abs(later)))
        if scale == 0.0:
            raise DegenerateCumulative("cumulative emissions are identically zero",
                                       context=self.record.key.label)
        self.mask = ~(np.abs(later) < config.exclusion_rel_tol * scale)
        self.excluded = int(later.size - self.mask.sum())
        if self.excluded > later.size / 2:
            raise DegenerateCumulative(
                f"{self.excluded} of {later.size} cumulative points are near zero",
                context=self.record.key.label,
            )
        self._target = later[self.mask]

    def reconstructed_cumulative(self, thetas: np.ndarray) -> np.ndarray:
        u = _saturating_rate(np.asarray(thetas, dtype=float), self.tau, self.u_max)
        emissions = _emissions_from_rate(u, self.sigma0, self.energy)
        return cumulative_trapezoid(emissions, self.years, axis=-1, initial=0.0)

    def evaluate(self, thetas: np.ndarray) -> np.ndarray:
        """Objective for many thetas at once"""
        estimate = self.reconstructed_cumulative(thetas)[..., 1:][..., self.mask]
        return np.mean(np.abs(1.0 - estimate / self._target), axis=-1)

    def __call__(self, theta: float) -> float:
        return float(self.evaluate(np.float64(theta)))


def fit_objective(theta: float, record: ScenarioRecord, u_max: float,
                  config: Optional[FitConfig] = None) -> float:
    """Average absolute relative distance between cumulative emissions paths"""
    return CumulativeObjective(record, u_max, config or FitConfig())(theta)


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float, max_iter: int = 500) -> Tuple[float, float]:
    """
    Golden section search for a minimum on [a, b]

    Returns:
        (x, f(x)) for the best point seen
    """
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)

    for _ in range(max_iter):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)

    if fc < fd:
        return c, fc
    return d, fd


def halving_time(theta: float, u_max: float, time_unit_years: float = 5.0) -> float:
    """Years until intensity reaches half its start-year value"""
    if not u_max > 0.5:
        raise NeverHalves(f"u_max = {u_max} never halves the initial intensity")
    if not theta > 0:
        raise FitError(f"theta must be positive, got {theta}")
    return time_unit_years * math.log(1.0 - 0.5 / u_max) / -theta


def ambition_bucket(halving_years: float) -> AmbitionBucket:
    if not halving_years > 0:
        raise FitError(f"halving time must be positive, got {halving_years}")
    for bucket, (lower, upper) in _BUCKET_BOUNDS.items():
        if lower < halving_years <= upper:
            return bucket
    raise FitError(f"halving time {halving_years} matches no bucket")


def fit_theta(record: ScenarioRecord, u_max: float, config: Optional[FitConfig] = None) -> ThetaEstimate:
    """
    Fit the decarbonization speed of one scenario

    A log-spaced grid scan locates the best cell, then golden section search
    refines within the neighbouring cells. Minima on a bound are reported
    with converged=False.

    Args:
        record: Scenario record (aligned or alignable to config.start_year)
        u_max: Ensemble maximum decarbonization rate
        config: Fit settings

    Returns:
        ThetaEstimate
    """
    config = config or FitConfig()
    objective = CumulativeObjective(record, u_max, config)

    grid = np.geomspace(config.theta_min, config.theta_max, config.grid_points)
    values = objective.evaluate(grid)
    best = int(np.argmin(values))
    lower = grid[max(best - 1, 0)]
    upper = grid[min(best + 1, grid.size - 1)]

    theta, value = golden_section(objective, lower, upper, config.refine_tol)
    if values[best] < value:
        theta, value = float(grid[best]), float(values[best])

    converged = True
    for bound in (config.theta_min, config.theta_max):
        if abs(theta - bound) <= 2 * config.refine_tol or objective(bound) <= value:
            theta, value = bound, objective(bound)
            converged = False
            break

    if not converged:
        logger.warning(f"{record.key.label}: theta pinned at bound {theta:g}")

    return ThetaEstimate(
        key=record.key,
        theta=float(theta),
        objective=float(value),
        halving_years=float(halving_time(theta, u_max, config.time_unit_years)),
        u_max_used=u_max,
        converged=converged,
        time_unit_years=config.time_unit_years,
        excluded_points=objective.excluded,
    )


def fit_ensemble(records: Sequence[ScenarioRecord], u_max: float,
                 config: Optional[FitConfig] = None) -> Tuple[List[ThetaEstimate], List[IngestWarning]]:
    """
    Fit every scenario on a thread pool

    Returns:
        Estimates in input order, plus a warning for each scenario whose fit failed
    """
    config = config or FitConfig()
    estimates: List[ThetaEstimate] = []
    warnings: List[IngestWarning] = []

    with ThreadPoolExecutor(max_workers=config.max_workers) as executor:
        futures = [executor.submit(fit_theta, record, u_max, config) for record in records]
        for record, future in zip(records, futures):
            try:
                estimates.append(future.result())
            except DecarbError as e:
                logger.warning(f"Fit failed for {record.key.label}: {e}")
                warnings.append(IngestWarning(record.key.model, record.key.raw_name, str(e)))

    logger.info(f"Fitted {len(estimates)} of {len(records)} scenarios with u_max = {u_max:.4f}")
    return estimates, warnings


def synthesize_scenario(theta_star: float, u_max: float, sigma0: float, energy_path: AnnualSeries,
                        config: Optional[FitConfig] = None,
                        key: Optional[ScenarioKey] = None) -> ScenarioRecord:
    """
    Scenario whose rate path follows the saturating model exactly

    Args:
        theta_star: True speed
        u_max: Asymptotic rate
        sigma0: Start-year intensity (kgCO2/kWh)
        energy_path: Positive primary energy (EJ/yr) on a grid containing the start year
        config: Fit settings (start year and time unit)
        key: Identity for the record

    Returns:
        ScenarioRecord
    """
    config = config or FitConfig()
    if not theta_star > 0 or not sigma0 > 0:
        raise FitError(f"theta_star and sigma0 must be positive (theta_star={theta_star}, sigma0={sigma0})")

    t0 = config.start_year
    if t0 not in energy_path.years:
        raise StartYearMissing(f"start year {t0} not on grid {list(energy_path.years)}")

    energy = energy_path.value_array()
    u = _saturating_rate(np.float64(theta_star), _tau(energy_path.years, t0, config.time_unit_years), u_max)
    emissions = _emissions_from_rate(u, sigma0, energy)

    return ScenarioRecord(
        key=key or SYNTHETIC_KEY,
        emissions_ffi=AnnualSeries.from_arrays(energy_path.years, emissions, "Mt CO2/yr"),
        primary_energy=energy_path,
    )


def fit_trajectory(record: ScenarioRecord, estimate: ThetaEstimate,
                   config: Optional[FitConfig] = None) -> FitTrajectory:
    """Observed and reconstructed rate and cumulative emissions for plotting"""
    config = config or FitConfig()
    objective = CumulativeObjective(record, estimate.u_max_used, config)
    observed = decarb_rate(carbon_intensity(objective.record, config.start_year))
    fitted = reconstruct_rate(estimate.theta, estimate.u_max_used, objective.record.years,
                              config.start_year, config.time_unit_years, key=record.key)
    return FitTrajectory(
        key=record.key,
        theta=estimate.theta,
        years=observed.years,
        u=observed.u,
        u_hat=fitted.u,
        cumulative=objective.cumulative,
        cumulative_hat=objective.reconstructed_cumulative(np.float64(estimate.theta)),
    )
