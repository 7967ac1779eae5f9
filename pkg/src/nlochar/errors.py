"""Exception types shared across the package."""


class InvalidDimensionError(ValueError):
    """Matrix or vector dimensions are inconsistent or not even."""


class InvalidPartitionError(ValueError):
    """A partial-transposition mode subset is empty, full, or out of range."""


class InvalidSettingError(ValueError):
    """A measurement direction is unusable (e.g. the zero vector)."""


class MissingSettingError(ValueError):
    """A covariance assembly is missing required measurement settings."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(
            "incomplete setting catalog, missing: " + ", ".join(self.missing)
        )


class DegenerateMatrixError(ValueError):
    """A matrix required to be positive definite is not."""


class LeakageExceededError(ValueError):
    """A truncated Fock state lost too much norm to the cutoff."""
