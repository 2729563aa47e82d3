"""Exception hierarchy.

Two families: argument/hypothesis problems (``DomainError`` and friends,
subclasses of ``ValueError``) and numerical failures (``NumericalError``).
The CLI maps the first family to exit code 2 and the second to exit code 3.
"""


class BoundsError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BoundsError, ValueError):
    """An argument lies outside the domain where the computation is defined."""


class InvalidInputError(DomainError):
    """Input data is malformed (wrong shape, non-finite entries, ...)."""


class HypothesisError(DomainError):
    """Inputs are valid but violate the hypothesis of the bound being used."""


class EmptyProfileError(DomainError):
    """A resolvent profile contains no usable entry."""


class UnsupportedNormError(DomainError):
    """The requested norm is not supported by this computation."""


class NumericalError(BoundsError, ArithmeticError):
    """A computation failed for numerical reasons."""


class ConvergenceError(NumericalError):
    """An iterative method did not converge.

    ``index`` identifies the eigenvalue (or other item) that failed.
    """

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class ExpmOverflowError(NumericalError):
    def __init__(self, msg, t):
        super().__init__(msg)
        self.t = t


class NearSpectrumError(NumericalError):
    """``zI - A`` is numerically singular.

    ``condition`` carries the condition number of ``zI - A`` and
    ``shift_norm`` the norm of ``zI - A``, so callers can still recover
    the resolvent norm as ``condition / shift_norm``.
    """

    def __init__(self, msg, z, condition, shift_norm=None):
        super().__init__(msg)
        self.z = z
        self.condition = condition
        self.shift_norm = shift_norm


class PrecisionError(NumericalError):
    """Successive refinements of a quadrature disagree."""


class LinearDependenceError(NumericalError):
    """A Gram matrix is not positive definite."""


class DefectiveMatrixError(NumericalError):
    """Eigenvector matrix too ill-conditioned to treat as diagonalizable."""


class MultiplicityError(NumericalError):
    """An eigenvalue assumed simple is (numerically) degenerate."""
