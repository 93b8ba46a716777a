"""Exception types raised across the package."""


class SymmetryViolationError(ValueError):
    """Coefficients do not describe a real-valued field."""


class SingularMultiplierError(ValueError):
    """A negative-power multiplier was applied to a field with a nonzero mean."""


class DimensionError(ValueError):
    """Fields live on different grids."""


class InvalidNormSpecError(ValueError):
    pass


class UnsupportedExponentError(ValueError):
    pass


class InvalidExponentError(ValueError):
    pass


class OrderingError(ValueError):
    """Time samples are not in nondecreasing order."""


class UnsupportedOrderError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


class EmptyInputError(ValueError):
    pass


class ConsistencyError(ValueError):
    pass


class ConfigError(ValueError):
    pass


class MissingVelocityError(LookupError):
    """The velocity provider has no field for a requested stage time."""

    def __init__(self, t):
        super().__init__(f"no velocity available at t={t!r}")
        self.t = t


class BlowUpError(RuntimeError):
    """Non-finite coefficients appeared during time stepping."""

    def __init__(self, t, message="non-finite coefficients"):
        super().__init__(f"{message} at t={t!r}")
        self.t = t


class CorruptCheckpointError(ValueError):
    """A checkpoint file failed validation; ``field`` names the offending part."""

    def __init__(self, field, message):
        super().__init__(f"corrupt checkpoint ({field}): {message}")
        self.field = field
