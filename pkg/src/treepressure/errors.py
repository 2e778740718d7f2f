"""Shared exception types for the treepressure library."""


class TreePressureError(Exception):
    """Base class for all library errors."""


class MapDomainError(TreePressureError, ValueError):
    """Input point lies outside the map's domain interval."""


class OrbitEscapeError(TreePressureError, RuntimeError):
    """A forward orbit left the domain before the requested horizon."""


class DepthCapError(TreePressureError, RuntimeError):
    """Requested preimage-tree depth exceeds the configured cap."""


class PeriodCapError(TreePressureError, RuntimeError):
    """Requested period exceeds the periodic-point enumeration cap."""


class ConvergenceError(TreePressureError, RuntimeError):
    """An iterative solver failed to converge within its budget."""


class PreconditionError(TreePressureError, RuntimeError):
    """A documented operation precondition does not hold."""


class VerificationError(TreePressureError, RuntimeError):
    """A posterior consistency check failed, or all samples were filtered out."""
