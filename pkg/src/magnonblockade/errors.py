"""Exception types shared across the package.

The CLI maps these onto its exit-code contract, so keep the hierarchy flat
and stable.
"""


class MagnonBlockadeError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(MagnonBlockadeError, ValueError):
    """Operator or state dimensions are invalid or inconsistent."""


class ParameterError(MagnonBlockadeError, ValueError):
    """A physical parameter or configuration value is out of range."""


class NoExcitationError(MagnonBlockadeError):
    """Magnon occupation is below the floor where g2(0) is meaningful."""


class PositivityError(MagnonBlockadeError):
    """A quantity that must be non-negative came out significantly negative."""


class TruncationError(MagnonBlockadeError):
    """Fock cutoff escalation hit the hard cap without converging."""


class NonUniqueSteadyStateError(MagnonBlockadeError):
    """The Liouvillian null space is not one-dimensional."""


class SteadyStateConvergenceError(MagnonBlockadeError):
    """Steady-state residual stayed above tolerance after all fallbacks."""


class StiffnessError(MagnonBlockadeError):
    """Time integration failed (step size underflow or solver abort)."""


class ConfigError(MagnonBlockadeError, ValueError):
    """A run configuration file is malformed or fails schema validation."""
