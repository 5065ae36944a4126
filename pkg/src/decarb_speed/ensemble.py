"""
Empirical statistics of the fitted speeds across the scenario ensemble
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .errors import StatisticsError, TooFewValues
from .resampling import run_resamples
from .speedfit import ThetaEstimate, halving_time

logger = logging.getLogger(__name__)

CI_LEVELS = (0.05, 0.95)
MIN_RESAMPLES = 1000


def quantile(values: np.ndarray, q: float) -> float:
    """Linear interpolation between order statistics at position 1 + (n - 1) q"""
    return float(np.quantile(values, q, method='linear'))


STATISTICS: Dict[str, Callable[[np.ndarray], float]] = {
    'mean': lambda values: float(np.mean(values)),
    'median': lambda values: quantile(values, 0.5),
    'p25': lambda values: quantile(values, 0.25),
    'p75': lambda values: quantile(values, 0.75),
    'std': lambda values: float(np.std(values, ddof=1)),
}


def _statistic(name: str) -> Callable[[np.ndarray], float]:
    try:
        return STATISTICS[name]
    except KeyError:
        raise StatisticsError(f"unknown statistic {name!r}; choose from {sorted(STATISTICS)}") from None


@dataclass(frozen=True)
class EnsembleSummary:
    n: int
    mean: float
    median: float
    std: float
    min: float
    max: float
    p25: float
    p75: float
    # years to halve for each location statistic; empty without u_max
    halving_years: Dict[str, float] = field(default_factory=dict)

    def value(self, statistic: str) -> float:
        return float(getattr(self, statistic))

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class Histogram:
    edges: List[float]
    counts: List[int]

    def as_dict(self) -> Dict[str, Any]:
        return {'edges': self.edges, 'counts': self.counts}


@dataclass(frozen=True)
class BootstrapResult:
    statistic: str
    point: float
    lo: float
    hi: float
    n_resamples: int
    seed: int
    resample_mean: float

    def as_dict(self) -> Dict[str, Any]:
        return {'statistic': self.statistic, 'point': self.point, 'lo': self.lo, 'hi': self.hi,
                'seed': self.seed, 'B': self.n_resamples, 'resample_mean': self.resample_mean}


@dataclass(frozen=True)
class HalvingTimeRow:
    statistic: str
    theta: float
    theta_lo: float
    theta_hi: float
    years: float
    years_lo: float
    years_hi: float


@dataclass(frozen=True)
class BenchmarkShares:
    n: int
    horizon_year: int
    reference_halving_years: float
    n_halving_by_horizon: int
    n_faster_than_reference: int

    @property
    def share_halving_by_horizon(self) -> float:
        return self.n_halving_by_horizon / self.n if self.n else 0.0

    @property
    def share_faster_than_reference(self) -> float:
        return self.n_faster_than_reference / self.n if self.n else 0.0

    def as_dict(self) -> Dict[str, Any]:
        return {**asdict(self),
                'share_halving_by_horizon': self.share_halving_by_horizon,
                'share_faster_than_reference': self.share_faster_than_reference}


def _as_array(values: Sequence[float], minimum: int) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.size < minimum:
        raise TooFewValues(f"need at least {minimum} values, got {array.size}")
    return array


def summary_stats(thetas: Sequence[float], u_max: Optional[float] = None,
                  time_unit_years: float = 5.0) -> EnsembleSummary:
    """
    Summary statistics of the speed estimates

    Args:
        thetas: Speed estimates
        u_max: Ensemble maximum rate; when given, statistics are also
            translated into years to halve the initial intensity
        time_unit_years: Time unit of theta

    Returns:
        EnsembleSummary (sample std uses divisor n - 1)
    """
    values = _as_array(thetas, 2)
    stats = {
        'mean': STATISTICS['mean'](values),
        'median': STATISTICS['median'](values),
        'std': STATISTICS['std'](values),
        'min': float(values.min()),
        'max': float(values.max()),
        'p25': STATISTICS['p25'](values),
        'p75': STATISTICS['p75'](values),
    }

    halving: Dict[str, float] = {}
    if u_max is not None:
        for name in ('mean', 'median', 'min', 'max', 'p25', 'p75'):
            halving[name] = halving_time(stats[name], u_max, time_unit_years)

    return EnsembleSummary(n=int(values.size), halving_years=halving, **stats)


def histogram(thetas: Sequence[float], n_bins: int = 10) -> Histogram:
    """Equal-width bins over [min, max]; the last bin is closed on both sides"""
    values = _as_array(thetas, 1)
    if n_bins < 1:
        raise StatisticsError(f"n_bins must be at least 1, got {n_bins}")
    counts, edges = np.histogram(values, bins=n_bins)
    return Histogram(edges=[float(edge) for edge in edges], counts=[int(count) for count in counts])


def bootstrap_ci(values: Sequence[float], statistic: str = 'mean', n_resamples: int = 5000,
                 seed: int = 42, max_workers: int = 1) -> BootstrapResult:
    """
    Percentile bootstrap interval (5%, 95%) by resampling the estimates

    Args:
        values: Speed estimates, one per scenario
        statistic: One of mean, median, p25, p75, std
        n_resamples: Number of resamples (at least 1000)
        seed: Base seed; resample k uses substream (seed, k)
        max_workers: Threads; results do not depend on it

    Returns:
        BootstrapResult
    """
    data = _as_array(values, 2)
    if n_resamples < MIN_RESAMPLES:
        raise StatisticsError(f"n_resamples must be at least {MIN_RESAMPLES}, got {n_resamples}")
    compute = _statistic(statistic)
    n = data.size

    def draw(rng: np.random.Generator) -> float:
        return compute(data[rng.integers(0, n, size=n)])

    resampled = run_resamples(draw, n_resamples, seed, max_workers)
    result = BootstrapResult(
        statistic=statistic,
        point=compute(data),
        lo=quantile(resampled, CI_LEVELS[0]),
        hi=quantile(resampled, CI_LEVELS[1]),
        n_resamples=n_resamples,
        seed=seed,
        resample_mean=float(np.mean(resampled)),
    )
    logger.info(f"Bootstrap {statistic}: {result.point:.4g} ({result.lo:.4g}, {result.hi:.4g}), B={n_resamples}")
    return result


def halving_time_table(summary: EnsembleSummary, cis: Sequence[BootstrapResult],
                       u_max: float, time_unit_years: float = 5.0) -> List[HalvingTimeRow]:
    """
    Translate statistics and their intervals into years to halve

    A larger theta halves sooner, so the years interval is
    (halving_time(hi), halving_time(lo)).
    """
    rows = []
    for ci in cis:
        theta = summary.value(ci.statistic)
        rows.append(HalvingTimeRow(
            statistic=ci.statistic,
            theta=theta,
            theta_lo=ci.lo,
            theta_hi=ci.hi,
            years=halving_time(theta, u_max, time_unit_years),
            years_lo=halving_time(ci.hi, u_max, time_unit_years),
            years_hi=halving_time(ci.lo, u_max, time_unit_years),
        ))
    return rows


def benchmark_shares(estimates: Sequence[ThetaEstimate], horizon_year: int = 2100,
                     start_year: int = 2010, reference_halving_years: float = 60.0) -> BenchmarkShares:
    """
    How many scenarios halve their intensity by the horizon, and how many
    halve faster than a historical reference
    """
    years = np.asarray([estimate.halving_years for estimate in estimates], dtype=float)
    return BenchmarkShares(
        n=int(years.size),
        horizon_year=horizon_year,
        reference_halving_years=reference_halving_years,
        n_halving_by_horizon=int(np.sum(years <= horizon_year - start_year)),
        n_faster_than_reference=int(np.sum(years < reference_halving_years)),
    )
