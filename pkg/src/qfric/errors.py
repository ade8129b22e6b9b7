"""Exception types raised across the package."""


class QfricError(Exception):
    """Base class for all errors raised by qfric."""


class ZeroSeparation(QfricError, ValueError):
    """The two atoms coincide, so the dipole kernel is singular."""


class UnsupportedOrder(QfricError, ValueError):
    pass


class StepUnderflow(QfricError, ValueError):
    """Finite-difference step too small relative to the evaluation point."""


class DegenerateSamples(QfricError, ValueError):
    pass


class EvenOrder(QfricError, ValueError):
    pass


class QuadratureNoConvergence(QfricError, RuntimeError):
    pass


class RegimeViolation(QfricError, ValueError):
    pass


class NegativeLag(QfricError, ValueError):
    pass


class OrderMismatch(QfricError, ValueError):
    pass


class MissingOrder(QfricError, ValueError):
    pass


class WindowTooShort(QfricError, ValueError):
    pass


class NotScattering(QfricError, ValueError):
    pass


class ConfigError(QfricError, ValueError):
    pass
