"""Exception types shared across the lab."""


class GrauertLabError(Exception):
    """Base class for every error raised by this package."""


class FiberTooLarge(GrauertLabError, ValueError):
    pass


class BranchAmbiguity(GrauertLabError, ValueError):
    pass


class OutsideTube(GrauertLabError, ValueError):
    pass


class ModelUnsupported(GrauertLabError, NotImplementedError):
    pass


class EmptyWindow(GrauertLabError, ValueError):
    pass


class DegeneratePoint(GrauertLabError, ValueError):
    pass


class InsufficientRange(GrauertLabError, ValueError):
    pass


class DivergentRegion(GrauertLabError, ValueError):
    pass


class QuadratureFailure(GrauertLabError, RuntimeError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class OnConoid(GrauertLabError, ZeroDivisionError):
    pass


class TailTooLarge(GrauertLabError, ValueError):
    pass


class DegenerateLeadingCoefficient(GrauertLabError, ValueError):
    pass


class NonConvergence(GrauertLabError, RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class GridTooCoarse(GrauertLabError, RuntimeError):
    pass


class NonPositiveValue(GrauertLabError, ValueError):
    pass


class ConfigError(GrauertLabError, ValueError):
    pass


class NoiseFloor(GrauertLabError, ArithmeticError):
    pass
