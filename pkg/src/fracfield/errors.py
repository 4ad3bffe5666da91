"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
DomainError / PreconditionError / EmbeddingError -> 3.
"""


class FracfieldError(Exception):
    """Base class for all package errors."""


class DomainError(FracfieldError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigError(FracfieldError, ValueError):
    """An experiment or quadrature configuration is invalid."""


class PreconditionError(FracfieldError, ValueError):
    """A numerical precondition (decay, smoothness, resolution) is violated."""


class EmbeddingError(PreconditionError):
    """A field does not fit into the requested periodic box."""
