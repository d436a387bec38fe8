"""Exception hierarchy shared across the laboratory.

Configuration and domain errors mean the caller asked for something the
code cannot interpret; integration-family errors mean a numerical
computation broke down. The command line maps the former to exit code 2
and the latter to exit code 3.
"""


class TypicalityLabError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(TypicalityLabError):
    """Invalid setup: bad grid size, unknown config keys, malformed specs."""


class DomainError(TypicalityLabError):
    """Input lies outside the mathematical domain of an operation."""


class DegenerateSliceError(DomainError):
    """The environment value lands where the wave function has no mass."""


class IntegrationError(TypicalityLabError):
    """Numerical time integration became unstable or failed."""


class SingularityError(IntegrationError):
    """Evaluation at a singular point of an interaction potential."""


class ResolutionError(IntegrationError):
    """The grid no longer resolves the state (spectral tail mass too large)."""
