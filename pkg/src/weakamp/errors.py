"""Exception hierarchy shared by every module."""


class WeakAmpError(ValueError):
    """Base class for all errors raised by weakamp."""


class PreconditionError(WeakAmpError):
    """An input violates a documented precondition (e.g. not normalized)."""


class NonUnitaryError(WeakAmpError):
    """A matrix offered as an optical element is not unitary."""


class DegeneratePostSelectionError(WeakAmpError):
    """Post-selection left (numerically) nothing to normalize."""


class DegenerateConfigurationError(WeakAmpError):
    """The amplified phase is undefined for the requested parameters."""


class DivergentWeakValueError(WeakAmpError):
    """Pre- and post-selected states are orthogonal."""


class NoDataError(WeakAmpError):
    """No photon survived post-selection, so nothing can be estimated."""
