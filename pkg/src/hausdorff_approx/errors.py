"""Exception hierarchy.

Every numerical failure raised by the package derives from
:class:`NumericalFailure`; configuration problems derive from
:class:`ConfigError`.  The CLI maps the two families onto distinct exit codes.
"""


class HausdorffError(Exception):
    """Base class for all package errors."""


class ConfigError(HausdorffError, ValueError):
    """Invalid user-supplied configuration."""


class InvalidExponent(ConfigError):
    pass


class InvalidGrid(ConfigError):
    pass


class ZeroArgument(ConfigError):
    """A closed form was evaluated at x = 0 where it has no limit."""


class OutOfRange(ConfigError):
    """Argument lies outside the range of a scaling function."""


class NonCompactSupport(ConfigError):
    pass


class NumericalFailure(HausdorffError, ArithmeticError):
    """Base class for failures detected during a computation."""


class NonMonotoneScaling(NumericalFailure):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NonOddScaling(NumericalFailure):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NonInvertibleScaling(NumericalFailure):
    pass


class QuadratureNotConverged(NumericalFailure):
    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class OscillatoryTailNotConverged(QuadratureNotConverged):
    pass


class TailNotIntegrable(NumericalFailure):
    pass


class DivergentIntegral(NumericalFailure):
    """Truncated integrals keep growing as the truncation is relaxed."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class DiniDivergent(DivergentIntegral):
    pass


class RateFitFailure(NumericalFailure):
    pass


class DegenerateZeroError(NumericalFailure):
    """All measured errors vanish, so no rate can be fitted."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvalidAlpha(ConfigError):
    pass


class KernelMassNotOne(ConfigError):
    pass
