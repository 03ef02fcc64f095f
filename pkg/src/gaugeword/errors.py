"""Exception and warning types raised across the package."""


class GaugeWordError(Exception):
    """Base class for data and numerical errors."""


class ShapeMismatch(GaugeWordError, ValueError):
    pass


class SingularInput(GaugeWordError, ValueError):
    pass


class SingularTransform(SingularInput):
    pass


class InvalidTransform(GaugeWordError, ValueError):
    """A matrix does not satisfy the structural rules of its declared kind."""


class RankRequestTooLarge(GaugeWordError, ValueError):
    pass


class NotPositiveDefinite(GaugeWordError, ValueError):
    def __init__(self, message, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class NonpositiveDiagonal(GaugeWordError, ValueError):
    pass


class RankDeficientV(GaugeWordError, ValueError):
    pass


class EmptyVocabulary(GaugeWordError, ValueError):
    pass


class ZeroVector(GaugeWordError, ValueError):
    pass


class ConstantInput(GaugeWordError, ValueError):
    pass


class LengthMismatch(GaugeWordError, ValueError):
    pass


class TooFewPairs(GaugeWordError, ValueError):
    pass


class NonFiniteObjective(GaugeWordError, ValueError):
    pass


class BadK(GaugeWordError, ValueError):
    pass


class MalformedLine(GaugeWordError, ValueError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class DimensionMismatch(MalformedLine):
    pass


class DegenerateSpectrum(UserWarning):
    """Canonical form is not unique (repeated or vanishing spectrum values)."""


class DuplicateWord(UserWarning):
    """An embedding file listed the same word more than once."""


class ZeroFactor(GaugeWordError, ValueError):
    pass
