"""
Exception hierarchy for the decarbonization speed pipeline
"""

from typing import Optional


class DecarbError(Exception):
    """Base error; `exit_code` is what the CLI returns when this escapes"""

    exit_code = 1

    def __init__(self, message: str, *, context: Optional[str] = None):
        self.context = context
        super().__init__(f"{context}: {message}" if context else message)


class ConfigError(DecarbError):
    exit_code = 2


# Ingest

class IngestError(DecarbError):
    exit_code = 3


class MissingHeader(IngestError):
    pass


class UnknownUnit(IngestError):
    pass


class MalformedNumber(IngestError):
    pass


class EmptyTable(IngestError):
    pass


class StartYearMissing(IngestError):
    pass


class TooFewPoints(IngestError):
    pass


# Intensity

class IntensityError(DecarbError):
    exit_code = 4


class NonPositiveInitialIntensity(IntensityError):
    pass


class EmptyEnsemble(IntensityError):
    pass


# Fitting

class FitError(DecarbError):
    exit_code = 5


class DegenerateCumulative(FitError):
    pass


class NeverHalves(FitError):
    pass


# Statistics

class StatisticsError(DecarbError):
    exit_code = 6


class TooFewValues(StatisticsError):
    pass


class NonPositiveValue(StatisticsError):
    pass


class NonPositiveX(StatisticsError):
    pass


class ZeroVariance(StatisticsError):
    pass
