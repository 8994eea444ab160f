"""Exception hierarchy.

The CLI maps these onto exit codes: ValidationError -> 2,
OptimizerFailure -> 3, NumericError -> 4.
"""


class QcohereError(Exception):
    """Base class for all package errors."""


class ValidationError(QcohereError):
    """An input failed a structural invariant."""


class NotHermitian(ValidationError):
    pass


class NotUnitTrace(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BadSubsystemIndex(ValidationError):
    pass


class BadRecipe(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class BadDimension(ValidationError):
    pass


class BadParameter(ValidationError):
    pass


class SingleSubsystem(ValidationError):
    pass


class SupportViolation(ValidationError):
    """Relative-entropy support condition violated (p outside supp q)."""


class NumericError(QcohereError):
    """A numerical routine produced an unusable result."""


class EigenFailure(NumericError):
    pass


class NonFiniteObjective(NumericError):
    pass


class OptimizerFailure(QcohereError):
    """The minimizer could not produce a usable value."""
