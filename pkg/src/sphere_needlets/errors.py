"""Exception hierarchy.

Every error carries a short ``category`` tag; the command-line interface
prints it in front of the message and uses it to pick the exit code.
"""


class SphereNeedletError(Exception):
    category = "error"
    exit_code = 1


class DomainError(SphereNeedletError, ValueError):
    """An argument lies outside the domain of the function (e.g. |t| > 1)."""

    category = "domain"
    exit_code = 2


class ParameterError(SphereNeedletError, ValueError):
    category = "parameter"
    exit_code = 2


class UnsupportedDimensionError(SphereNeedletError, ValueError):
    category = "dimension"
    exit_code = 2


class PrecisionViolationError(SphereNeedletError):
    """A cubature rule does not reach the polynomial precision a caller needs."""

    category = "precision"
    exit_code = 3


class PointSetError(SphereNeedletError):
    category = "pointset"
    exit_code = 4


class PointSetParseError(PointSetError):
    category = "pointset-parse"


class NonUnitPointError(PointSetError):
    category = "pointset-nonunit"


class NonPositiveWeightError(PointSetError):
    category = "pointset-weight"


class NumericalConsistencyError(SphereNeedletError, ArithmeticError):
    category = "numerical"
    exit_code = 5


class ResourceLimitError(SphereNeedletError):
    category = "resource"
    exit_code = 6


class DegenerateFitError(SphereNeedletError):
    category = "fit"
    exit_code = 5


class MismatchError(SphereNeedletError, ValueError):
    category = "mismatch"
    exit_code = 2
