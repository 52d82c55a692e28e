"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A caller-supplied parameter is outside its allowed domain."""


class ConsistencyError(RuntimeError):
    """An internal invariant failed; this signals a bug, not bad input."""


class ConfigError(ValueError):
    """A run configuration is malformed.

    ``key`` names the offending entry so the CLI can report it.
    """

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
