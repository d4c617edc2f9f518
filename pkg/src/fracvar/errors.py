"""Exception types shared across the package."""


class FracvarError(Exception):
    """Base class for package-specific failures."""


class HypothesisError(FracvarError):
    """A structural hypothesis needed by the requested computation fails.

    Examples: a sweep range outside the admissible parameter interval, or
    an interval computation asked for a sign-changing nonlinearity.
    """


class ResolutionError(FracvarError):
    """The discretization is too coarse for a guaranteed-positive quantity.

    Raised when the assembled energy form fails its lower-bound check; the
    fix is a finer grid or a smaller mode cutoff, not a tolerance bump.
    """
