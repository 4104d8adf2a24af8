"""Exception types shared across the package."""


class FgpsimError(Exception):
    """Base class for all package errors."""


class ConfigError(FgpsimError, ValueError):
    """A configuration is invalid or a config file cannot be parsed."""


class DomainError(FgpsimError, ValueError):
    """An input lies outside an operation's mathematical domain."""


class GridMismatchError(FgpsimError, ValueError):
    """Two path objects do not share the same time grid."""


class PathAbort(FgpsimError, RuntimeError):
    """A simulated path became unusable (overflow, non-finite values).

    The Monte-Carlo harness catches this, excludes the path and counts it
    against the exclusion budget.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class CostExceedsWealthError(PathAbort):
    """kappa * turnover >= 1 at a trade: the cost would wipe out wealth."""


class ExperimentError(FgpsimError, RuntimeError):
    """A Monte-Carlo experiment failed as a whole (e.g. too many exclusions)."""
