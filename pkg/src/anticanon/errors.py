"""Exception hierarchy shared by the analysis pipeline."""


class AnticanonError(Exception):
    """Base class for every error raised by the package."""


class InvalidFamily(AnticanonError, ValueError):
    """Operator family fails structural validation (shape, labels, finiteness)."""


class RankDeficientBasis(AnticanonError, ValueError):
    pass


class NotAntiCommuting(AnticanonError):
    """Some pair of operators does not anti-commute to tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CommutationViolation(AnticanonError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotDiagonalizable(AnticanonError):
    """An operator (or its restriction to a cell) failed the eigenbasis test."""

    def __init__(self, message, leak=None):
        super().__init__(message)
        self.leak = leak


class UnsupportedOperator(AnticanonError):
    """Neither the operator nor its square is diagonalizable."""


class InconsistentSpectrum(AnticanonError):
    """A diagonalizable member acts nontrivially where its square vanishes."""


class OddDimension(AnticanonError):
    pass


class SingularB(AnticanonError):
    pass


class NonConstantSquare(AnticanonError):
    pass


class DimensionObstruction(AnticanonError):
    """A halving step was required on a subspace that cannot be halved."""


class InvalidSpec(AnticanonError, ValueError):
    pass


class FormatError(AnticanonError, ValueError):
    """Malformed input file; ``where`` names the offending field."""

    def __init__(self, message, where=None):
        if where:
            message = f"{where}: {message}"
        super().__init__(message)
        self.where = where


class IllConditionedWarning(UserWarning):
    """Eigenvector matrix condition number exceeded the reporting threshold."""
