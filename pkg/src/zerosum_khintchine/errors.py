"""Exception hierarchy shared by every verification module."""


class ParameterError(ValueError):
    """An argument is outside the operation's domain."""


class CapacityError(ParameterError):
    """Exhaustive enumeration was requested above the configured cap."""


class ConstraintInfeasibleError(ParameterError):
    """The zero-sum sign constraint cannot be met (odd dimension)."""


class PreconditionError(ParameterError):
    """A stated hypothesis of the checked inequality does not hold."""
