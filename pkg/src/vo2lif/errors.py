"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """A physical quantity is outside the domain of an operation."""


class ConfigError(ValueError):
    """A configuration document or object violates its contract.

    ``key`` carries the dotted key path that triggered the error, when known.
    """

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)
