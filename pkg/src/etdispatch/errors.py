"""Exception hierarchy shared across the package."""


class DispatchError(Exception):
    """Base class for all package-specific errors."""


# graph
class NonSymmetric(DispatchError):
    pass


class NegativeWeight(DispatchError):
    pass


class Disconnected(DispatchError):
    pass


# tbg
class NegativeTime(DispatchError):
    pass


class ReversedInterval(DispatchError):
    pass


class NonPositiveScale(DispatchError):
    pass


# projection
class InfeasibleState(DispatchError):
    pass


# objectives
class NegativeGap(DispatchError):
    pass


# etm
class NonPositiveEta(DispatchError):
    pass


# oracle
class InfeasibleDemand(DispatchError):
    pass


class NonMonotoneGradient(DispatchError):
    pass


class GridTooCoarse(DispatchError):
    pass


# dynamics
class NonFiniteState(DispatchError):
    pass


class InvariantViolation(DispatchError):
    pass


class InvalidPrescribedTimes(DispatchError):
    pass


# scenario
class ParseError(DispatchError):
    pass


class ValidationError(DispatchError):
    pass
