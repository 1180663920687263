"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition (shape, family, level, ...)."""


class DegeneracyError(ValueError):
    """Numerically dependent data: singular Gram matrix or non-faithful state."""


class PreconditionError(ValueError):
    """A mathematical hypothesis of the requested operation is not met."""


class UnsupportedError(ValueError):
    """Requested mode exceeds the supported problem size or configuration."""


class WindowTooSmallError(PreconditionError):
    """Group-window radius cannot accommodate the element's support."""


class NoUnitaryError(ValueError):
    """The candidate map does not define an isometry of the representation space."""


class AmbiguousVerdictError(RuntimeError):
    """Commutation residual falls inside the guard band between pass and fail."""


class UnboundedObjectiveError(RuntimeError):
    """Objective increases along a direction with vanishing constraint norm."""
