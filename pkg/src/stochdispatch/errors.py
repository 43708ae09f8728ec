"""Exception hierarchy shared by all stochdispatch modules."""


class StochDispatchError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(StochDispatchError):
    """A required column/field is missing or a manifest entry is malformed."""


class DataFormatError(StochDispatchError):
    """Structurally broken input (non-monotone timestamps, ragged rows, ...)."""


class DataValueError(StochDispatchError):
    """A cell value is invalid (NaN, out of per-unit range, ...)."""


class FitError(StochDispatchError):
    """A statistical fit cannot be performed (empty samples, ...)."""


class DegenerateVariableError(FitError):
    """A variable is constant and carries no copula information."""


class DomainError(StochDispatchError, ValueError):
    """An argument lies outside its mathematical domain."""


class ConfigurationError(StochDispatchError):
    """Inconsistent or incomplete run/model configuration."""


class TopologyError(StochDispatchError):
    """The network graph is unusable (disconnected, no slack, ...)."""


class NumericalError(StochDispatchError):
    """A numerical kernel failed (singular matrix, lost positive-definiteness)."""


class ResourceError(StochDispatchError):
    """A configured resource cap (iterations, workers) was exhausted."""


class UnsupportedModeError(StochDispatchError):
    """An operation was asked of a solution mode that cannot provide it."""


class SingularFitWarning(UserWarning):
    """Fewer samples than variables; correlation estimate was ridge-repaired."""


class NearDeterministicWarning(UserWarning):
    """A conditional collapsed to (near) zero variance and was floored."""
