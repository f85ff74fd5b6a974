"""Exception hierarchy shared by the solver components."""


class LDLTRError(Exception):
    """Base class for all errors raised by :mod:`ldltr`."""


class InputError(LDLTRError, ValueError):
    """Invalid or non-finite input data."""


class DegenerateRotationError(LDLTRError):
    """Both entries of the pair to be rotated are zero."""


class UpdateFailureError(LDLTRError):
    """A rank-one factor update produced non-finite values."""


class FactorRecoveryError(LDLTRError):
    """The direct factors of ``B = H^{-1}`` could not be recovered."""


class SolveFailureError(LDLTRError):
    """An iterative linear solve produced non-finite values."""


class CurvatureError(LDLTRError):
    """The curvature pair does not satisfy ``y's > 0`` (update must be skipped)."""


class ProblemNotFoundError(LDLTRError, KeyError):
    """Unknown test problem name."""
