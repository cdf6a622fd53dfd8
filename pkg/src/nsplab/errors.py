"""Exception types shared across the package.

The CLI maps these onto its exit-code table: config errors -> 2, numeric
guards (domain/state violations) -> 3, I/O -> 4.
"""


class DomainError(ValueError):
    """An operation was called outside its mathematical domain."""


class GridMismatchError(ValueError):
    """Fields on different grids were combined."""


class VacuumError(RuntimeError):
    """The density 1+a reached zero or below somewhere on the grid."""


class CflError(RuntimeError):
    """Requested time step exceeds the advective CFL limit."""


class DivergenceError(RuntimeError):
    """A tracked norm blew up past the divergence guard."""


class ConfigError(ValueError):
    """Experiment configuration failed to parse or validate."""
