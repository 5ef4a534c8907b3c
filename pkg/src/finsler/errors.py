"""Exception hierarchy."""


class FinslerError(Exception):
    """Base class for all errors raised by this package."""


class JetDomainError(FinslerError, ValueError):
    """Jet operation outside its domain (division by zero, sqrt of non-positive, ...)."""


class ChartError(FinslerError, ValueError):
    """Point outside the coordinate chart of a metric family."""


class NonSmoothError(FinslerError, ValueError):
    """Derivatives requested where the metric is not differentiable."""


class PositivityError(FinslerError, ValueError):
    """A Finsler norm is not positive at the queried vector."""


class DegenerateMetricError(FinslerError, ValueError):
    """Fundamental tensor is (numerically) singular."""


class NullDirectionError(FinslerError, ValueError):
    """Quantity divides by L at a null vector."""


class ConsistencyError(FinslerError, RuntimeError):
    """Two independent computations of the same quantity disagree."""


class HypothesisError(FinslerError, ValueError):
    """A structural hypothesis (e.g. Berwald) required by an operation fails."""


class QuadratureError(FinslerError, RuntimeError):
    """Quadrature refinement did not converge."""


class ConfigError(FinslerError, ValueError):
    """Invalid command-line configuration."""
