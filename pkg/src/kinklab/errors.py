"""Exception hierarchy shared by all modules."""


class KinklabError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgument(KinklabError, ValueError):
    """A precondition on an argument is violated."""


class DegeneratePotential(KinklabError):
    """The potential vanishes or turns negative where a kink needs U > 0."""


class SpectralConditionViolated(KinklabError):
    """The odd linearized operator does not have exactly one admissible eigenvalue."""


class FGRConditionViolated(KinklabError):
    """The resonance coupling integral is below the non-degeneracy threshold."""


class WindowError(KinklabError):
    """A fit or matching window is unusable (too short, not decayed, nonpositive data)."""


class NearSingular(KinklabError):
    """A Wronskian-type denominator is numerically zero."""


class BlowupError(KinklabError):
    """Time stepping produced non-finite values.

    The last finite state is attached as ``snapshot`` when available.
    """

    def __init__(self, message, snapshot=None, time=None):
        super().__init__(message)
        self.snapshot = snapshot
        self.time = time
