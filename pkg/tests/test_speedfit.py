import math

import numpy as np
import pytest

from conftest import DECADAL_YEARS, make_key, make_record
from decarb_speed.config import FitConfig
from decarb_speed.errors import DegenerateCumulative, FitError, NeverHalves, StartYearMissing
from decarb_speed.ingest import AnnualSeries, ScenarioRecord
from decarb_speed.speedfit import (
    AmbitionBucket,
    CumulativeObjective,
    ambition_bucket,
    cumulative_emissions,
    fit_ensemble,
    fit_objective,
    fit_theta,
    fit_trajectory,
    golden_section,
    halving_time,
    reconstruct_emissions,
    reconstruct_rate,
    synthesize_scenario,
)


def _random_record(rng, theta=None, u_max=None):
    theta = rng.uniform(0.01, 0.5) if theta is None else theta
    u_max = rng.uniform(1.0, 1.6) if u_max is None else u_max
    energy = rng.uniform(300.0, 900.0, size=len(DECADAL_YEARS))
    return make_record(theta, u_max=u_max, sigma0=rng.uniform(0.15, 0.3), energy=energy), theta, u_max


def test_reconstruct_rate_is_zero_at_start():
    rate = reconstruct_rate(0.06, 1.52, DECADAL_YEARS, 2010, 5.0)

    assert rate.u[0] == 0.0


def test_reconstruct_rate_reaches_one_half():
    tau = math.log(1 - 0.5 / 1.52) / -0.06

    rate = reconstruct_rate(0.06, 1.52, [2010, 2020], 2010, 10.0 / tau)

    assert tau == pytest.approx(6.6493, abs=1e-3)
    assert rate.u[1] == pytest.approx(0.5)


def test_reconstruct_rate_approaches_u_max():
    rate = reconstruct_rate(2.0, 1.52, [2010, 2100], 2010, 5.0)

    assert rate.u[-1] == pytest.approx(1.52, rel=1e-6)


def test_reconstruct_rate_rejects_non_positive_theta():
    with pytest.raises(FitError):
        reconstruct_rate(0.0, 1.52, DECADAL_YEARS, 2010, 5.0)


def test_synthesized_rate_at_2100():
    record = make_record(0.18, u_max=1.52)
    sigma = np.asarray(record.emissions_ffi.values) / np.asarray(record.primary_energy.values) * 0.0036

    u_2100 = 1 - sigma[-1] / sigma[0]

    assert u_2100 == pytest.approx(1.52 * (1 - math.exp(-3.24)), rel=1e-9)
    assert u_2100 == pytest.approx(1.4605, abs=1e-4)


def test_tiny_theta_keeps_intensity_constant():
    energy = [500.0, 520.0, 560.0, 600.0, 610.0, 630.0, 650.0, 700.0, 720.0, 750.0]

    record = make_record(1e-9, energy=energy)

    ratios = np.asarray(record.emissions_ffi.values) / np.asarray(energy)
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-7)


def test_reconstruct_emissions_matches_synthetic_scenario():
    record = make_record(0.08, u_max=1.52, sigma0=0.24)

    series = reconstruct_emissions(0.08, 1.52, record, 0.24)

    np.testing.assert_allclose(series.values, record.emissions_ffi.values, rtol=1e-9)
    assert series.values[-1] < 0


def test_cumulative_constant_series():
    series = AnnualSeries.from_arrays(DECADAL_YEARS, [10.0] * 10, "Mt CO2/yr")

    cumulative = cumulative_emissions(series)

    assert cumulative.values[0] == 0.0
    assert cumulative.values[-1] == pytest.approx(900.0)
    assert cumulative.unit == "Mt CO2"


def test_cumulative_linear_ramp():
    series = AnnualSeries.from_arrays(DECADAL_YEARS, [10.0 * k for k in range(10)], "Mt CO2/yr")

    assert cumulative_emissions(series).values[-1] == pytest.approx(4050.0)


def test_cumulative_two_points_and_uneven_gaps():
    pair = AnnualSeries.from_arrays([2010, 2020], [3.0, 7.0], "Mt CO2/yr")
    uneven = AnnualSeries.from_arrays([2005, 2010, 2020], [2.0, 2.0, 4.0], "Mt CO2/yr")

    assert cumulative_emissions(pair).values == (0.0, 50.0)
    assert cumulative_emissions(uneven).values == pytest.approx((0.0, 10.0, 40.0))


def test_objective_is_zero_at_true_theta():
    record = make_record(0.12, u_max=1.3)

    assert fit_objective(0.12, record, 1.3) == pytest.approx(0.0, abs=1e-10)


def test_objective_of_doubled_cumulative_is_one():
    record = make_record(0.12, u_max=1.3)
    objective = CumulativeObjective(record, 1.3, FitConfig())
    objective.reconstructed_cumulative = lambda thetas: 2.0 * objective.cumulative

    assert objective(0.5) == pytest.approx(1.0)


def test_objective_of_identical_cumulative_is_zero():
    record = make_record(0.12, u_max=1.3)
    objective = CumulativeObjective(record, 1.3, FitConfig())
    objective.reconstructed_cumulative = lambda thetas: objective.cumulative.copy()

    assert objective(0.5) == 0.0


def test_objective_with_cancelling_emissions_is_degenerate():
    mostly_zero = ScenarioRecord(
        key=make_key(),
        emissions_ffi=AnnualSeries.from_arrays(DECADAL_YEARS, [1.0] + [0.0] * 9, "Mt CO2/yr"),
        primary_energy=AnnualSeries.from_arrays(DECADAL_YEARS, [500.0] * 10, "EJ/yr"),
    )
    flipped = ScenarioRecord(
        key=make_key(),
        emissions_ffi=AnnualSeries.from_arrays(DECADAL_YEARS, [1.0, -1.0] * 5, "Mt CO2/yr"),
        primary_energy=AnnualSeries.from_arrays(DECADAL_YEARS, [500.0] * 10, "EJ/yr"),
    )

    assert CumulativeObjective(mostly_zero, 1.52, FitConfig()).excluded == 0
    with pytest.raises(DegenerateCumulative):
        CumulativeObjective(flipped, 1.52, FitConfig())


def test_golden_section_finds_parabola_minimum():
    x, fx = golden_section(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 1e-10)

    assert x == pytest.approx(0.3, abs=1e-6)
    assert fx == pytest.approx(0.0, abs=1e-12)


def test_fit_recovers_known_speed():
    estimate = fit_theta(make_record(0.08, u_max=1.52), 1.52)

    assert estimate.theta == pytest.approx(0.08, abs=1e-4)
    assert estimate.objective <= 1e-8
    assert estimate.converged
    assert estimate.halving_years == pytest.approx(halving_time(estimate.theta, 1.52))
    assert type(estimate.halving_years) is float


def test_fit_recovers_speed_when_grid_starts_before_start_year():
    years = [2005] + DECADAL_YEARS
    record = make_record(0.08, u_max=1.52, energy=[500.0 + 15.0 * k for k in range(len(years))], years=years)
    sigma = np.asarray(record.emissions_ffi.values) / np.asarray(record.primary_energy.values)

    estimate = fit_theta(record, 1.52)

    assert sigma[1] / sigma[0] == pytest.approx(1.0 / (1.0 - 1.52 * (1.0 - math.exp(0.08))))
    assert estimate.theta == pytest.approx(0.08, abs=1e-4)
    assert estimate.objective <= 1e-8


def test_synthesize_needs_start_year_on_grid():
    energy = AnnualSeries.from_arrays([2005, 2020, 2030], [500.0] * 3, "EJ/yr")

    with pytest.raises(StartYearMissing):
        synthesize_scenario(0.08, 1.52, 0.24, energy)


def test_fit_round_trip_over_random_scenarios(rng):
    for _ in range(100):
        record, theta, u_max = _random_record(rng)

        estimate = fit_theta(record, u_max)

        assert abs(estimate.theta - theta) <= 1e-4
        assert estimate.objective <= 1e-8


def test_fit_matches_exhaustive_grid(rng):
    config = FitConfig()
    grid = np.linspace(config.theta_min, config.theta_max, 1_000_000)

    for _ in range(50):
        record, _, u_max = _random_record(rng)
        objective = CumulativeObjective(record, u_max, config)
        best_value, best_theta = math.inf, None
        for chunk in np.array_split(grid, 20):
            values = objective.evaluate(chunk)
            index = int(np.argmin(values))
            if values[index] < best_value:
                best_value, best_theta = float(values[index]), float(chunk[index])

        estimate = fit_theta(record, u_max, config)

        assert abs(estimate.theta - best_theta) <= 2e-4
        assert estimate.objective <= best_value + 1e-12


def test_fit_preserves_ordering(rng):
    energy = rng.uniform(400.0, 800.0, size=len(DECADAL_YEARS))
    thetas = [0.02, 0.05, 0.11, 0.2, 0.35]

    fitted = [fit_theta(make_record(theta, energy=energy), 1.52).theta for theta in thetas]

    assert fitted == sorted(fitted)
    assert len(set(fitted)) == len(fitted)


def test_constant_intensity_pins_theta_at_lower_bound():
    energy = [500.0 + 20.0 * k for k in range(10)]
    record = ScenarioRecord(
        key=make_key(),
        emissions_ffi=AnnualSeries.from_arrays(DECADAL_YEARS, [e * 60.0 for e in energy], "Mt CO2/yr"),
        primary_energy=AnnualSeries.from_arrays(DECADAL_YEARS, energy, "EJ/yr"),
    )
    config = FitConfig()

    estimate = fit_theta(record, 1.52, config)

    assert estimate.theta == config.theta_min
    assert estimate.converged is False


def test_fit_respects_time_unit():
    config = FitConfig(time_unit_years=10.0)
    record = synthesize_scenario(0.16, 1.52, 0.24,
                                 AnnualSeries.from_arrays(DECADAL_YEARS, [500.0] * 10, "EJ/yr"), config)

    estimate = fit_theta(record, 1.52, config)

    assert estimate.theta == pytest.approx(0.16, abs=1e-4)
    assert estimate.halving_years == pytest.approx(halving_time(0.08, 1.52, 5.0), rel=1e-3)


def test_fit_ensemble_keeps_order_and_reports_failures(rng):
    records = [_random_record(rng, u_max=1.52)[0] for _ in range(5)]
    short = ScenarioRecord(
        key=make_key("IMAGE"),
        emissions_ffi=AnnualSeries.from_arrays([2010, 2020, 2030], [3.0, 2.0, 1.0], "Mt CO2/yr"),
        primary_energy=AnnualSeries.from_arrays([2010, 2020, 2030], [5.0, 5.0, 5.0], "EJ/yr"),
    )

    estimates, warnings = fit_ensemble(records[:2] + [short] + records[2:], 1.52, FitConfig(max_workers=3))

    assert [e.key for e in estimates] == [r.key for r in records]
    assert [w.model for w in warnings] == ["IMAGE"]


def test_fit_trajectory_lines_up_with_the_scenario():
    record = make_record(0.1)
    estimate = fit_theta(record, 1.52)

    trajectory = fit_trajectory(record, estimate)

    assert list(trajectory.years) == DECADAL_YEARS
    np.testing.assert_allclose(trajectory.u_hat, trajectory.u, atol=1e-6)
    np.testing.assert_allclose(trajectory.cumulative_hat, trajectory.cumulative, rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("theta, expected", [(0.06, 33.25), (0.18, 11.08), (0.009, 221.6)])
def test_halving_time_closed_form(theta, expected):
    assert halving_time(theta, 1.52, 5.0) == pytest.approx(expected, abs=0.05)


def test_halving_time_against_rounded_published_values():
    assert halving_time(0.06, 1.52) == pytest.approx(33.1, rel=0.02)
    assert halving_time(0.07, 1.52) == pytest.approx(28.5, abs=0.5)


def test_halving_time_is_inverse_in_theta():
    assert halving_time(0.12, 1.52) == pytest.approx(halving_time(0.06, 1.52) / 2)


def test_halving_time_decreases_with_u_max():
    years = [halving_time(0.1, u_max) for u_max in (0.6, 0.9, 1.2, 1.52, 2.0)]

    assert years == sorted(years, reverse=True)


def test_halving_time_with_pinned_u_max():
    theta = 0.075

    assert -math.log(1 - 0.5 / 1.52) == pytest.approx(0.398955, abs=1e-4)
    assert halving_time(theta, 1.52) == pytest.approx(5 * 0.398955 / theta, rel=2e-4)


def test_never_halves():
    with pytest.raises(NeverHalves):
        halving_time(0.1, 0.5)


@pytest.mark.parametrize("years, bucket", [
    (33.1, AmbitionBucket.FROM_30_TO_40),
    (9.0, AmbitionBucket.UNDER_10),
    (95.0, AmbitionBucket.OVER_90),
    (20.0, AmbitionBucket.FROM_10_TO_20),
    (10.0, AmbitionBucket.UNDER_10),
    (90.0, AmbitionBucket.FROM_50_TO_90),
])
def test_ambition_bucket(years, bucket):
    assert ambition_bucket(years) is bucket


def test_bucket_partition():
    for years in np.linspace(0.1, 500.0, 20001):
        matches = [b for b in AmbitionBucket if b.bounds[0] < years <= b.bounds[1]]
        assert matches == [ambition_bucket(float(years))]


def test_estimate_row_fields():
    estimate = fit_theta(make_record(0.06), 1.52)

    row = estimate.as_row()

    assert list(row) == ["model", "scenario", "ssp", "rcp", "theta", "objective",
                         "halving_years", "bucket", "converged"]
    assert row["bucket"] == "(30,40]"
