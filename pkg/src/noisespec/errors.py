"""Exception types shared across the package."""


class NoiseSpecError(Exception):
    """Base class for all domain errors raised by this package."""


class SingularEvaluationError(NoiseSpecError):
    """A scalar function was evaluated at (or too close to) a pole or branch point."""

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = tuple(points) if points is not None else ()


class PoleProximityError(NoiseSpecError):
    """A frequency-domain solve hit an (almost) singular system matrix."""

    def __init__(self, message, s=None, cond=None):
        super().__init__(message)
        self.s = s
        self.cond = cond


class ExtrapolationError(NoiseSpecError):
    """A limit extrapolation did not converge; carries the iterate ladder."""

    def __init__(self, message, iterates=None):
        super().__init__(message)
        self.iterates = tuple(iterates) if iterates is not None else ()


class DetectionError(NoiseSpecError):
    """Peak detection on a transformed trace failed (flat, edge, or malformed peak)."""
