"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the batch front end
can map it to a structured report entry.  ``ValidationError`` subclasses mean
the input was rejected; ``NumericError`` subclasses mean a computation could
not meet its tolerance.
"""


class NilReturnError(Exception):
    code = "error"


class ValidationError(NilReturnError, ValueError):
    code = "validation"


class NumericError(NilReturnError, ArithmeticError):
    code = "numeric"


class AssumptionViolation(ValidationError):
    """The system is not of the admissible form (f(0) != 0, 1 <= k <= l)."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class OrderTooLow(ValidationError):
    code = "order_too_low"


class NonzeroConstantTerm(ValidationError):
    code = "nonzero_constant_term"


class OutOfRadius(ValidationError):
    code = "out_of_radius"


class NonInvertibleLeadingCoefficient(NumericError):
    code = "non_invertible_leading_coefficient"


class InterpolationFailure(NumericError):
    code = "interpolation_failure"


class QuadratureFailure(NumericError):
    code = "quadrature_failure"


class NegativeBracket(NumericError):
    code = "negative_bracket"


class DegenerateJacobian(NumericError):
    code = "degenerate_jacobian"


class NoReturnDetected(NumericError):
    code = "no_return_detected"


class ResidualBelowNoiseFloor(NumericError):
    code = "residual_below_noise_floor"
