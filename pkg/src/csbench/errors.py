"""Exception types shared across the package."""


class CsbenchError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(CsbenchError):
    """Operands have incompatible shapes."""


class RankDeficient(CsbenchError):
    """The sensing matrix does not have full row rank."""


class NumericalFailure(CsbenchError):
    """A solver produced a non-finite or degenerate quantity.

    The best result computed before the failure is attached as ``result``
    (may be None when the failure happened before any iterate existed).
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotConverged(CsbenchError):
    """Iteration limit reached with the residual still above tolerance.

    The best iterate found is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ZeroReferenceAmplitude(CsbenchError):
    """A reference scatterer has zero magnitude, the ratio is undefined."""


class ZeroImage(CsbenchError):
    """Image has no power; the requested metric is undefined."""


class CmatFormatError(CsbenchError):
    """A CMAT file is malformed."""
