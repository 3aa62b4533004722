"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """An argument violates an operation's precondition."""


class NotADensityMatrix(ValueError):
    """A matrix is not Hermitian, not unit-trace, or has negative eigenvalues."""


class ResourceLimit(RuntimeError):
    """The requested problem size exceeds a configured cap."""
