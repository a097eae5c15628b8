"""Exception hierarchy shared across the package.

CLI exit codes map onto these: validation problems exit with 2,
infeasible configurations with 3, internal invariant violations with 4.
"""


class AhPowerError(Exception):
    """Base class for all package errors."""


class ValidationError(AhPowerError):
    """A scenario or parameter violates a documented invariant."""


class ScenarioParseError(AhPowerError):
    """A scenario file could not be parsed."""


class InfeasibleConfigError(AhPowerError):
    """The configuration cannot be scheduled (e.g. RAW segment <= 0,
    or the per-period activity exceeds the beacon interval)."""


class UnreachableStationError(AhPowerError):
    """A station is placed beyond the range of the most robust MCS."""
