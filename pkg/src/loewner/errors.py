"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and an optional
``context`` mapping; the CLI turns these into one-line diagnostics.
"""


class LoewnerError(Exception):
    code = "error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context


class OrderMismatchError(LoewnerError, ValueError):
    code = "order_mismatch"


class VanishingCoefficientError(LoewnerError, ZeroDivisionError):
    code = "vanishing_coefficient"


class CompositionError(LoewnerError, ValueError):
    code = "composition"


class InvalidDensityError(LoewnerError, ValueError):
    code = "invalid_density"

    def __init__(self, message, invariant, **context):
        super().__init__(message, invariant=invariant, **context)
        self.invariant = invariant


class InvalidDriverError(LoewnerError, ValueError):
    code = "invalid_driver"


class BoundaryDegeneracyError(LoewnerError, ArithmeticError):
    code = "boundary_degeneracy"


class SingularityError(LoewnerError, ArithmeticError):
    code = "kernel_singularity"


class IntegrationError(LoewnerError, ArithmeticError):
    code = "integration_failure"


class InversionError(LoewnerError, ArithmeticError):
    code = "inversion_failure"


class ContourError(LoewnerError, ValueError):
    code = "contour_not_injective"


class RecursionInconsistencyError(LoewnerError, ArithmeticError):
    code = "recursion_inconsistent"


class ConfigError(LoewnerError, ValueError):
    code = "invalid_config"
