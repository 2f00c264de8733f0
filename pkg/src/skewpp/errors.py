"""Exception types. Each carries the CLI exit code it maps to."""


class SkewPPError(Exception):
    exit_code = 3


class ConfigError(SkewPPError):
    exit_code = 2


class NumericalError(SkewPPError):
    exit_code = 3


class OrderingViolation(ConfigError):
    def __init__(self, index, msg=None):
        self.index = index
        super().__init__(msg or f"corner ordering broken at position {index}")


class CenteringViolation(ConfigError):
    def __init__(self, index, msg=None):
        self.index = index
        super().__init__(msg or f"centering condition fails (index {index})")


class InterlacingViolation(ConfigError):
    def __init__(self, t, msg=None):
        self.t = t
        super().__init__(msg or f"slices at t={t} and t={t + 1} do not interlace")


class MonotonicityViolation(ConfigError):
    pass


class UnderdeterminedWeights(ConfigError):
    pass


class StateSpaceTooLarge(ConfigError):
    pass


class DivergentProduct(NumericalError):
    pass


class NoAdmissibleRadii(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    pass


class NotACriticalPoint(NumericalError):
    pass


class RootFindingFailed(NumericalError):
    pass


class DegenerateGeometry(NumericalError):
    pass


class OutOfSupportedRange(NumericalError):
    pass


class SeriesNotConverged(NumericalError):
    pass


class EmptyRun(NumericalError):
    pass


class CapTooSmall(UserWarning):
    pass
