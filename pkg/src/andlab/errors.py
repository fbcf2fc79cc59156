"""Exception hierarchy shared by all andlab modules.

The CLI maps these onto process exit codes: configuration/domain problems
exit with 2, numeric failures with 3, exceeded resource budgets with 4.
"""


class AndlabError(Exception):
    """Base class for all errors raised by andlab."""


class DomainError(AndlabError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConfigurationError(AndlabError, ValueError):
    """A configuration value violates a precondition; message names it."""


class NumericError(AndlabError, RuntimeError):
    """A numerical routine failed to converge or certify its result."""

    def __init__(self, message: str, best_residual: float | None = None):
        super().__init__(message)
        self.best_residual = best_residual


class SpectralCollisionError(NumericError):
    """Resolvent requested at an energy (numerically) inside the spectrum.

    Nonsingularity tests interpret this as a singular verdict rather than
    as a failure.
    """


class ResourceError(AndlabError, RuntimeError):
    """A requested computation exceeds the configured size budget."""
