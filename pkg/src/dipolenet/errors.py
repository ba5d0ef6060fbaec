"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A numeric argument lies outside its admissible range."""


class ContractError(ValueError):
    """A call violated an operation's precondition (e.g. rate of an inactive link)."""


class SizeError(ValueError):
    """Instance too large for the exhaustive solver."""


class ConfigError(ValueError):
    """Malformed or out-of-range configuration document."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class FitError(ValueError):
    """Scaling fit could not be computed from the given records."""
