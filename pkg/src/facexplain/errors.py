"""Exception types shared across the library."""


class FaceXplainError(Exception):
    """Base class for all library errors."""


class NoFaceFound(FaceXplainError):
    """Detector returned zero faces for an image."""

    def __init__(self, message: str = "no face found", image: str | None = None):
        super().__init__(message if image is None else f"{message} (image {image})")
        self.image = image


class DegenerateLandmarks(FaceXplainError):
    """Landmark constellation is collinear or coincident; transform under-determined."""


class BackendFailure(FaceXplainError):
    """A pluggable backend raised; the original error is chained as __cause__."""


class DimensionMismatch(FaceXplainError):
    pass


class ZeroNorm(FaceXplainError):
    pass


class InsufficientData(FaceXplainError):
    pass


class DegenerateDistribution(FaceXplainError):
    pass


class NoCrossing(FaceXplainError):
    """FMR - FNMR never changes sign along the DET sequence."""


class TargetUnreachable(FaceXplainError):
    """Requested FMR is below the resolution of the impostor score set."""


class ScorerFailure(FaceXplainError):
    pass


class MismatchedPair(FaceXplainError):
    """Saliency maps fed to an aggregate come from different image pairs."""


class EmptyMask(FaceXplainError):
    pass


class PairMismatch(FaceXplainError):
    """Context inputs disagree about which pair they describe."""


class EmptyContext(FaceXplainError):
    pass


class UnknownBackend(FaceXplainError):
    pass


class ConfigError(FaceXplainError):
    pass


class UnknownSession(FaceXplainError):
    pass


class SessionExpired(FaceXplainError):
    pass
