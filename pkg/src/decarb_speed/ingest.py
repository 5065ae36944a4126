"""
Scenario ingest for IIASA-style wide CSV files

One row per (model, scenario, region, variable), year columns to the right.
Records carry fossil/industry CO2 emissions and total primary energy on a
common year grid.
"""

import io
import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import IngestConfig
from .errors import (
    EmptyTable,
    IngestError,
    MalformedNumber,
    MissingHeader,
    StartYearMissing,
    TooFewPoints,
    UnknownUnit,
)

logger = logging.getLogger(__name__)

ID_COLUMNS = ("MODEL", "SCENARIO", "REGION", "VARIABLE", "UNIT")
FIRST_YEAR = 2005
LAST_YEAR = 2100

_SCENARIO_PATTERN = re.compile(
    r"^\s*SSP\s*([1-5])\s*-\s*(19|26|34|45|60|BASELINE)\s*$",
    re.IGNORECASE,
)


class SSP(str, Enum):
    SSP1 = "SSP1"
    SSP2 = "SSP2"
    SSP3 = "SSP3"
    SSP4 = "SSP4"
    SSP5 = "SSP5"

    @property
    def ordinal(self) -> int:
        return int(self.value[-1])


class RCP(str, Enum):
    RCP19 = "RCP19"
    RCP26 = "RCP26"
    RCP34 = "RCP34"
    RCP45 = "RCP45"
    RCP60 = "RCP60"
    BASELINE = "Baseline"

    @property
    def ordinal(self) -> int:
        return list(RCP).index(self) + 1

    @property
    def token(self) -> str:
        """Scenario-name suffix, e.g. '19' or 'Baseline'"""
        return self.value[3:] if self is not RCP.BASELINE else self.value


@dataclass(frozen=True, order=True)
class ScenarioKey:
    model: str
    ssp: SSP
    rcp: RCP
    raw_name: str

    @property
    def name(self) -> str:
        """Canonical scenario name, e.g. SSP1-19"""
        return f"{self.ssp.value}-{self.rcp.token}"

    @property
    def label(self) -> str:
        return f"{self.model}/{self.raw_name}"


def parse_scenario_name(raw_name: str) -> Optional[Tuple[SSP, RCP]]:
    """Split 'SSPx-yy' / 'SSPx-Baseline' into enums; None when it does not parse"""
    match = _SCENARIO_PATTERN.match(raw_name or "")
    if not match:
        return None
    ssp = SSP(f"SSP{match.group(1)}")
    token = match.group(2)
    rcp = RCP.BASELINE if token.upper() == "BASELINE" else RCP(f"RCP{token}")
    return ssp, rcp


@dataclass(frozen=True)
class AnnualSeries:
    """Values on a strictly ascending year grid"""

    years: Tuple[int, ...]
    values: Tuple[float, ...]
    unit: str

    def __post_init__(self):
        if len(self.years) != len(self.values):
            raise IngestError(f"{len(self.years)} years but {len(self.values)} values")
        if len(self.years) < 2:
            raise TooFewPoints(f"series needs at least 2 points, got {len(self.years)}")
        if any(b <= a for a, b in zip(self.years, self.years[1:])):
            raise IngestError(f"years must be strictly ascending: {list(self.years)}")
        if self.years[0] < FIRST_YEAR or self.years[-1] > LAST_YEAR:
            raise IngestError(f"years must lie in [{FIRST_YEAR}, {LAST_YEAR}]: {list(self.years)}")

    @classmethod
    def from_arrays(cls, years: Sequence[int], values: Sequence[float], unit: str) -> 'AnnualSeries':
        return cls(tuple(int(y) for y in years), tuple(float(v) for v in values), unit)

    def year_array(self) -> np.ndarray:
        return np.asarray(self.years, dtype=float)

    def value_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def value_at(self, year: int) -> float:
        return self.values[self.years.index(year)]


@dataclass(frozen=True)
class ScenarioRecord:
    """One scenario: emissions (Mt CO2/yr) and primary energy (EJ/yr) on one grid"""

    key: ScenarioKey
    emissions_ffi: AnnualSeries
    primary_energy: AnnualSeries

    def __post_init__(self):
        if self.emissions_ffi.years != self.primary_energy.years:
            raise IngestError("emissions and primary energy grids differ", context=self.key.label)
        if any(value <= 0 for value in self.primary_energy.values):
            raise IngestError("primary energy must be strictly positive", context=self.key.label)

    @property
    def years(self) -> Tuple[int, ...]:
        return self.emissions_ffi.years


@dataclass(frozen=True)
class IngestWarning:
    model: str
    scenario: str
    reason: str
    dropped: bool = True

    def __str__(self) -> str:
        action = "dropped" if self.dropped else "kept"
        return f"{self.model}/{self.scenario} {action}: {self.reason}"


ScenarioTable = List[ScenarioRecord]


def _normalize_columns(frame: pd.DataFrame) -> Tuple[pd.DataFrame, List[int]]:
    """Upper-case the id columns and pick out year columns"""
    renames: Dict[str, Any] = {}
    years: List[int] = []
    for column in frame.columns:
        name = str(column).strip()
        if name.upper() in ID_COLUMNS:
            renames[column] = name.upper()
        elif name.isdigit():
            year = int(name)
            renames[column] = year
            if FIRST_YEAR <= year <= LAST_YEAR:
                years.append(year)
            else:
                logger.warning(f"Ignoring year column {year} outside [{FIRST_YEAR}, {LAST_YEAR}]")
    frame = frame.rename(columns=renames)

    missing = [column for column in ID_COLUMNS if column not in frame.columns]
    if missing:
        raise MissingHeader(f"required columns missing: {missing}")
    if len(years) < 2:
        raise MissingHeader(f"need at least two year columns, found {years}")
    return frame, sorted(years)


def _coerce_numbers(frame: pd.DataFrame, years: List[int]) -> pd.DataFrame:
    """Turn year cells into floats; blank cells become NaN"""
    cells = frame[years].apply(lambda column: column.str.strip())
    numbers = cells.apply(pd.to_numeric, errors='coerce')
    bad = (cells != "") & ~np.isfinite(numbers)
    if bad.to_numpy().any():
        row, column = np.argwhere(bad.to_numpy())[0]
        record = frame.iloc[row]
        raise MalformedNumber(
            f"non-numeric value {cells.iat[row, column]!r} for {years[column]}",
            context=f"{record['MODEL']}/{record['SCENARIO']}/{record['VARIABLE']}",
        )
    return numbers


def _series_points(values: pd.Series) -> Dict[int, float]:
    return {int(year): float(value) for year, value in values.items() if not np.isnan(value)}


def parse_scenario_csv(data: bytes,
                       config: Optional[IngestConfig] = None) -> Tuple[ScenarioTable, List[IngestWarning]]:
    """
    Parse a wide scenario CSV into scenario records

    Args:
        data: UTF-8 CSV bytes
        config: Ingest settings (region, variables, units, start year)

    Returns:
        Records sorted by (model, scenario) and warnings in the same order
    """
    config = config or IngestConfig()

    try:
        frame = pd.read_csv(io.BytesIO(data), dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError as e:
        raise MissingHeader("input has no header row") from e
    except UnicodeDecodeError as e:
        raise IngestError(f"input is not UTF-8: {e}") from e

    frame, years = _normalize_columns(frame)
    for column in ID_COLUMNS:
        frame[column] = frame[column].str.strip()

    variables = {config.emissions_variable: config.emissions_units,
                 config.energy_variable: config.energy_units}
    frame = frame[(frame['REGION'] == config.region) & frame['VARIABLE'].isin(variables)]
    if frame.empty:
        raise EmptyTable(f"no rows for region {config.region!r} and the required variables")

    for variable, units in variables.items():
        rows = frame[frame['VARIABLE'] == variable]
        bad_units = sorted(set(rows['UNIT']) - set(units))
        if bad_units:
            raise UnknownUnit(f"unit(s) {bad_units} for {variable!r}; expected one of {list(units)}")

    numbers = _coerce_numbers(frame, years)
    frame = pd.concat([frame[list(ID_COLUMNS)], numbers], axis=1)

    records: ScenarioTable = []
    warnings: List[IngestWarning] = []
    seen_keys = set()

    for (model, scenario), group in frame.groupby(['MODEL', 'SCENARIO'], sort=True):
        def warn(reason: str, dropped: bool = True):
            warnings.append(IngestWarning(model, scenario, reason, dropped))

        parsed = parse_scenario_name(scenario)
        if parsed is None:
            warn("scenario name is not of the form SSPx-yy or SSPx-Baseline")
            continue

        counts = group['VARIABLE'].value_counts()
        absent = [variable for variable in variables if variable not in counts]
        if absent:
            warn(f"missing variable(s) {absent}")
            continue
        if (counts > 1).any():
            warn(f"duplicate rows for {sorted(counts[counts > 1].index)}")
            continue

        emission_row = group[group['VARIABLE'] == config.emissions_variable].iloc[0]
        energy_row = group[group['VARIABLE'] == config.energy_variable].iloc[0]
        emissions = _series_points(emission_row[years])
        energy = _series_points(energy_row[years])

        grid = sorted(set(emissions) & set(energy))
        trimmed = sorted((set(emissions) | set(energy)) - set(grid))
        if config.start_year not in grid:
            warn(f"no data for start year {config.start_year} in both variables")
            continue
        if len(grid) < 2:
            warn(f"only {len(grid)} common year(s)")
            continue
        if any(energy[year] <= 0 for year in grid):
            warn("primary energy is not strictly positive")
            continue

        key = ScenarioKey(model=model, ssp=parsed[0], rcp=parsed[1], raw_name=scenario)
        identity = (key.model, key.ssp, key.rcp)
        if identity in seen_keys:
            warn(f"duplicate of an earlier {key.name} scenario for {model}")
            continue
        seen_keys.add(identity)

        if trimmed:
            warn(f"years {trimmed} not reported for both variables", dropped=False)

        records.append(ScenarioRecord(
            key=key,
            emissions_ffi=AnnualSeries.from_arrays(grid, [emissions[y] for y in grid], emission_row['UNIT']),
            primary_energy=AnnualSeries.from_arrays(grid, [energy[y] for y in grid], energy_row['UNIT']),
        ))

    for warning in warnings:
        logger.warning(str(warning))

    if not records:
        raise EmptyTable(
            f"no usable scenarios for region {config.region!r} ({len(warnings)} dropped)"
        )

    logger.info(f"Parsed {len(records)} scenarios ({sum(w.dropped for w in warnings)} dropped)")
    return records, warnings


def read_scenario_csv(path: Union[str, Path],
                      config: Optional[IngestConfig] = None) -> Tuple[ScenarioTable, List[IngestWarning]]:
    """Read and parse a scenario CSV file, adding the file name to errors"""
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError as e:
        raise IngestError("input file not found", context=str(path)) from e

    try:
        return parse_scenario_csv(data, config)
    except IngestError as e:
        if e.context is None:
            raise type(e)(str(e), context=str(path)) from e
        raise


def align_to_start_year(record: ScenarioRecord, start_year: int, min_points: int = 6) -> ScenarioRecord:
    """
    Drop grid points before the start year

    Args:
        record: Scenario record
        start_year: First year to keep; must be on the grid
        min_points: Minimum number of points that must remain

    Returns:
        Record on the trimmed grid (the same object if nothing was dropped)
    """
    if start_year not in record.years:
        raise StartYearMissing(f"start year {start_year} not on grid {list(record.years)}",
                               context=record.key.label)

    index = record.years.index(start_year)
    remaining = len(record.years) - index
    if remaining < min_points:
        raise TooFewPoints(f"{remaining} grid points at/after {start_year}, need {min_points}",
                           context=record.key.label)
    if index == 0:
        return record

    def trim(series: AnnualSeries) -> AnnualSeries:
        return AnnualSeries(series.years[index:], series.values[index:], series.unit)

    return ScenarioRecord(record.key, trim(record.emissions_ffi), trim(record.primary_energy))


def table_to_frame(records: ScenarioTable, region: str = "World",
                   config: Optional[IngestConfig] = None) -> pd.DataFrame:
    """Wide DataFrame in the input layout, two rows per record"""
    config = config or IngestConfig()
    years = sorted({year for record in records for year in record.years})
    rows = []
    for record in records:
        for variable, series in ((config.emissions_variable, record.emissions_ffi),
                                 (config.energy_variable, record.primary_energy)):
            row = {'MODEL': record.key.model, 'SCENARIO': record.key.raw_name, 'REGION': region,
                   'VARIABLE': variable, 'UNIT': series.unit}
            row.update({str(year): value for year, value in zip(series.years, series.values)})
            rows.append(row)
    return pd.DataFrame(rows, columns=list(ID_COLUMNS) + [str(year) for year in years])


def table_to_csv(records: ScenarioTable, region: str = "World",
                 config: Optional[IngestConfig] = None) -> str:
    """Serialize records back to the wide CSV layout; missing points are blank"""
    return table_to_frame(records, region, config).to_csv(index=False, na_rep='')


def table_to_json(records: ScenarioTable) -> Dict[str, Any]:
    return {
        'scenarios': [
            {
                'model': record.key.model,
                'scenario': record.key.raw_name,
                'ssp': record.key.ssp.value,
                'rcp': record.key.rcp.value,
                'years': list(record.years),
                'emissions_mtco2': list(record.emissions_ffi.values),
                'primary_energy_ej': list(record.primary_energy.values),
            }
            for record in records
        ]
    }
