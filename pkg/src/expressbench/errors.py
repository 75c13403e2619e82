"""Exception types raised across the toolkit."""


class CapacityError(ValueError):
    """Requested qubit count exceeds the dense-simulation cap."""


class ValidationError(ValueError):
    """Input violates a documented precondition (non-unitary gate, bad phase...)."""


class DimensionMismatchError(ValueError):
    """Operands act on different numbers of qubits."""


class DegenerateStateError(ArithmeticError):
    """A state has (numerically) zero norm and cannot be normalized."""


class DegeneratePoolError(ValueError):
    """A sample pool is too small or has zero variance."""


class DegenerateReferenceError(ArithmeticError):
    """A Haar reference mean is zero, so normalization is undefined."""
