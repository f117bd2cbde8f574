"""Exception types shared across the package."""


class HaarmfError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(HaarmfError):
    """A parameter combination that can never produce a valid run."""


class ResourceBudgetError(HaarmfError):
    """A requested computation exceeds the configured work budget."""


class OracleError(HaarmfError):
    """The slow reference integrator could not reach the requested accuracy."""
