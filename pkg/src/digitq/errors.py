"""Exception types shared across the package."""


class DigitqError(Exception):
    """Base class for all package errors."""


class EmptyResult(DigitqError):
    """A deletion operation removed every digit."""


class LengthNotDivisible(DigitqError):
    """String length is not a multiple of the operator block size."""


class SuffixTooShort(DigitqError):
    """Too few digits remain to perform a trustworthy suffix comparison."""


class OffGrid(DigitqError):
    """Requested angle is not a p-adic rational point of the permitted depth.

    States are only defined on the p-adic angle grid; requesting one
    elsewhere is a hard error, not an approximation.
    """


class NotAnEigenstate(DigitqError):
    """Operation requires a constant digit string."""


class NonConvergence(DigitqError):
    """Iteration reached its step budget without hitting a pole."""


class Tie(DigitqError):
    """A value landed exactly on a decision boundary (r = 1/2)."""


class DegenerateStatistic(DigitqError):
    """A statistic is undefined for this input (for example zero variance)."""
