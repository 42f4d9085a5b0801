"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class RangeError(ArithmeticError):
    """Result overflowed or underflowed the working-precision range."""


class UsageError(ValueError):
    """Arguments are well-formed but inconsistent (e.g. wrong weight scaling)."""


class ConstructionError(RuntimeError):
    """A data structure failed its own invariant check while being built."""


class StepOneCritical(RuntimeError):
    """The interpolation (Step I) error would swamp the quantity being measured."""
