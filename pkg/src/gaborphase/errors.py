"""Exception types shared by the package."""


class GaborPhaseError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(GaborPhaseError, ValueError):
    pass


class GridMismatchError(GaborPhaseError, ValueError):
    pass


class SupportOverflowError(GaborPhaseError, ValueError):
    """A shifted profile would leave the representable band."""


class MalformedInputError(GaborPhaseError, ValueError):
    pass


class IllPosedError(GaborPhaseError, ArithmeticError):
    """A linear system is too ill-conditioned to solve without regularization."""


class DegenerateFieldError(GaborPhaseError, ArithmeticError):
    """A correlation field has no positive leading eigenvalue."""
