"""Exception hierarchy shared by every module."""


class ErgographError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(ErgographError, ValueError):
    """A parameter is outside its admissible range."""


class ConnectivityError(ErgographError):
    """A random graph generator could not produce a connected graph."""


class DegenerateGeometryError(ErgographError):
    """Sensor positions do not determine the influence function."""


class RankDeficiencyError(ErgographError):
    """A matrix that must have full rank does not."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class ZeroDegreeError(ErgographError):
    """Normalization requested on a graph with an isolated vertex."""


class UnsupportedShiftError(ErgographError):
    """The shift operator is neither symmetric nor a directed cycle."""


class NumericalError(ErgographError):
    """An eigensolver or other numerical routine failed."""


class InvalidPsdError(ErgographError):
    """A power spectral density is negative or yields a non-real covariance."""


class SingularPrecisionError(ErgographError):
    """I - aS is (numerically) singular."""


class DegenerateNormalizationError(ErgographError):
    """A filter's DC response is zero, so it cannot be made unbiased."""
