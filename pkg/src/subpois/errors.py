"""Exception types shared across the package."""


class SubpoisError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(SubpoisError, ValueError):
    """A family or process parameter is outside its admissible range."""


class DomainError(SubpoisError, ValueError):
    """An operation was called with arguments outside its contract."""


class DivergentIntegralError(DomainError):
    """A requested Levy-measure integral does not converge."""


class SupportCapError(DomainError):
    """A state index exceeds the configured hard cap."""


class CancellationError(SubpoisError, ArithmeticError):
    """An alternating series lost too many digits to be trusted."""


class AccuracyError(SubpoisError, ArithmeticError):
    """A numerical routine could not reach its accuracy target."""


class InfiniteMomentError(SubpoisError, ArithmeticError):
    """The requested moment is infinite for this family."""


class BudgetError(SubpoisError, RuntimeError):
    """A rejection sampler exhausted its trial budget."""


class BinningError(SubpoisError, ValueError):
    """A goodness-of-fit binning produced expected counts that are too small."""
