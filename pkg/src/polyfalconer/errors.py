"""Exception hierarchy shared by all modules."""


class PolyFalconerError(Exception):
    """Base class for every error raised by this package."""


class DuplicateSlope(PolyFalconerError, ValueError):
    pass


class DegenerateBall(PolyFalconerError, ValueError):
    pass


class IndexOutOfRange(PolyFalconerError, IndexError):
    pass


class BudgetExceeded(PolyFalconerError):
    pass


class ParameterCollision(PolyFalconerError):
    """The lattice parameters u landed in the bad set (two sums coincide)."""


class RepresentationCollision(PolyFalconerError):
    """Two distinct power-sum representations give the same value."""


class ExhaustedTries(PolyFalconerError):
    pass


class ScheduleInfeasible(PolyFalconerError):
    pass


class NonMonotone(PolyFalconerError, ValueError):
    pass


class NotMaterialized(PolyFalconerError):
    pass
