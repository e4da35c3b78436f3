"""Exception types shared across the package."""


class PredsubError(Exception):
    """Base class for all package-specific errors."""


class RankDeficientError(PredsubError):
    """A spectrum needed at rank d has eigenvalues indistinguishable from zero.

    Raised instead of silently returning a lower-rank embedding: downstream
    scaling matrices divide by |eigenvalue|.
    """


class ConvergenceError(PredsubError):
    """The iterative eigensolver failed to reach the requested residual tolerance."""


class EdgeListFormatError(PredsubError):
    """An edge-list file could not be parsed.

    Carries the offending line number when one is known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}: "
            if line is not None:
                prefix = f"{path}:{line}: "
        super().__init__(prefix + message)
