"""Exception types raised by the corrugation engine.

Every guard in the pipeline raises one of these instead of letting a bad
configuration produce silently wrong geometry.  They all derive from
``CorrugateError`` so callers can catch the whole family at once.
"""

__all__ = [
    "CorrugateError",
    "DimensionError",
    "DirectionError",
    "MeanError",
    "ResolutionError",
    "DomainTooSmall",
    "AlignmentError",
    "NearH0Violation",
    "NegativeCoefficient",
    "NonImmersion",
    "DeficitTooLarge",
    "NegativeAmplitude",
    "ParamError",
    "UnknownPreset",
]


class CorrugateError(Exception):
    """Base class for all engine errors."""


class DimensionError(CorrugateError):
    """Array shapes or ambient/base dimensions are inconsistent."""


class DirectionError(CorrugateError):
    """A direction vector is not usable (not unit length, or the
    oscillation-transfer system is singular for it)."""


class MeanError(CorrugateError):
    """A profile that must have zero mean has a nonzero constant term."""


class ResolutionError(CorrugateError):
    """The grid cannot resolve a requested oscillation frequency."""


class DomainTooSmall(CorrugateError):
    """An operation would shrink the domain below the minimum usable size."""


class AlignmentError(CorrugateError):
    """Two grids that must share nodes do not align."""


class NearH0Violation(CorrugateError):
    """A metric field strays too far from the primitive-sum anchor to be
    decomposed."""


class NegativeCoefficient(CorrugateError):
    """A primitive-direction coefficient that must stay positive dipped to or
    below the floor (the decomposition would need an imaginary amplitude)."""


class NonImmersion(CorrugateError):
    """The map's induced metric is (numerically) degenerate somewhere, so no
    tangent frame exists."""


class DeficitTooLarge(CorrugateError):
    """The incoming metric deficit exceeds what one stage is allowed to
    absorb."""


class NegativeAmplitude(CorrugateError):
    """Oscillation-cancellation bookkeeping pushed a squared amplitude below
    the positivity floor."""


class ParamError(CorrugateError):
    """A parameter violates its documented range or compatibility rule."""


class UnknownPreset(CorrugateError):
    """Requested initial-data preset name is not registered."""
