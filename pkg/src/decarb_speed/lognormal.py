"""
Lognormal summary of the speed estimates

ln(theta) ~ N(mu, s2). Parameters come from the closed-form maximum
likelihood estimates (variance with divisor n).
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.stats import norm

from .ensemble import CI_LEVELS, MIN_RESAMPLES, STATISTICS, BootstrapResult, EnsembleSummary, quantile
from .errors import NonPositiveValue, NonPositiveX, StatisticsError, TooFewValues, ZeroVariance
from .resampling import run_resamples

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LognormalFit:
    mu: float
    s2: float
    n: int

    def __post_init__(self):
        if self.s2 < 0:
            raise StatisticsError(f"s2 must be non-negative, got {self.s2}")

    @property
    def s(self) -> float:
        return math.sqrt(self.s2)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ComparisonRow:
    statistic: str
    empirical: float
    empirical_lo: Optional[float]
    empirical_hi: Optional[float]
    lognormal: float
    lognormal_lo: Optional[float]
    lognormal_hi: Optional[float]


def lognormal_mle(thetas: Sequence[float]) -> LognormalFit:
    """Closed-form MLE: mean and biased variance of ln(theta)"""
    values = np.asarray(thetas, dtype=float)
    if values.size < 2:
        raise TooFewValues(f"need at least 2 values, got {values.size}")
    if np.any(values <= 0):
        raise NonPositiveValue(f"{int(np.sum(values <= 0))} value(s) are not positive")

    logs = np.log(values)
    mu = float(np.mean(logs))
    s2 = float(np.mean((logs - mu) ** 2))
    logger.info(f"Lognormal MLE: mu = {mu:.4f}, s2 = {s2:.4f} (n = {values.size})")
    return LognormalFit(mu=mu, s2=s2, n=int(values.size))


def lognormal_pdf(x: float, fit: LognormalFit) -> float:
    if not x > 0:
        raise NonPositiveX(f"density is defined for x > 0, got {x}")
    if not fit.s2 > 0:
        raise ZeroVariance("density needs s2 > 0")
    return math.exp(-(math.log(x) - fit.mu) ** 2 / (2 * fit.s2)) / (x * fit.s * math.sqrt(2 * math.pi))


def lognormal_stats(fit: LognormalFit) -> Dict[str, float]:
    """Mean, median, quartiles, variance and std of the fitted distribution"""
    z75 = float(norm.ppf(0.75))
    variance = (math.exp(fit.s2) - 1.0) * math.exp(2 * fit.mu + fit.s2)
    return {
        'mean': math.exp(fit.mu + fit.s2 / 2),
        'median': math.exp(fit.mu),
        'p25': math.exp(fit.mu - fit.s * z75),
        'p75': math.exp(fit.mu + fit.s * z75),
        'variance': variance,
        'std': math.sqrt(variance),
    }


def density_curve(fit: LognormalFit, x_max: float, n_points: int = 200) -> Dict[str, List[float]]:
    """Density on an equally spaced grid over (0, x_max]"""
    if not x_max > 0:
        raise NonPositiveX(f"x_max must be positive, got {x_max}")
    xs = np.linspace(0.0, x_max, n_points + 1)[1:]
    return {'x': [float(x) for x in xs], 'f': [lognormal_pdf(float(x), fit) for x in xs]}


def parametric_bootstrap(fit: LognormalFit, n: int = 126, n_resamples: int = 5000,
                         statistic: str = 'median', seed: int = 42,
                         max_workers: int = 1) -> BootstrapResult:
    """
    Bootstrap interval from samples of the fitted distribution

    Args:
        fit: Fitted lognormal
        n: Size of each simulated ensemble
        n_resamples: Number of simulated ensembles (at least 1000)
        statistic: One of mean, median, p25, p75, std
        seed: Base seed; resample k uses substream (seed, k)
        max_workers: Threads; results do not depend on it

    Returns:
        BootstrapResult whose point is the closed-form statistic of the fit
    """
    if not fit.s2 > 0:
        raise ZeroVariance("parametric bootstrap needs s2 > 0")
    if n < 2:
        raise TooFewValues(f"simulated ensembles need at least 2 members, got {n}")
    if n_resamples < MIN_RESAMPLES:
        raise StatisticsError(f"n_resamples must be at least {MIN_RESAMPLES}, got {n_resamples}")
    if statistic not in STATISTICS:
        raise StatisticsError(f"unknown statistic {statistic!r}; choose from {sorted(STATISTICS)}")
    compute = STATISTICS[statistic]
    mu, s = fit.mu, fit.s

    def draw(rng: np.random.Generator) -> float:
        return compute(rng.lognormal(mean=mu, sigma=s, size=n))

    resampled = run_resamples(draw, n_resamples, seed, max_workers)
    result = BootstrapResult(
        statistic=statistic,
        point=lognormal_stats(fit)[statistic],
        lo=quantile(resampled, CI_LEVELS[0]),
        hi=quantile(resampled, CI_LEVELS[1]),
        n_resamples=n_resamples,
        seed=seed,
        resample_mean=float(np.mean(resampled)),
    )
    logger.info(f"Parametric bootstrap {statistic}: ({result.lo:.4g}, {result.hi:.4g}), n={n}, B={n_resamples}")
    return result


def compare_with_empirical(summary: EnsembleSummary,
                           empirical_cis: Sequence[BootstrapResult],
                           fit: LognormalFit,
                           parametric_cis: Sequence[BootstrapResult]) -> List[ComparisonRow]:
    """Empirical and fitted statistics side by side with their bootstrap intervals"""
    closed_form = lognormal_stats(fit)
    empirical = {ci.statistic: ci for ci in empirical_cis}
    parametric = {ci.statistic: ci for ci in parametric_cis}

    rows = []
    for name in dict.fromkeys([*empirical, *parametric]):
        emp, par = empirical.get(name), parametric.get(name)
        rows.append(ComparisonRow(
            statistic=name,
            empirical=summary.value(name),
            empirical_lo=emp.lo if emp else None,
            empirical_hi=emp.hi if emp else None,
            lognormal=closed_form[name],
            lognormal_lo=par.lo if par else None,
            lognormal_hi=par.hi if par else None,
        ))
    return rows
