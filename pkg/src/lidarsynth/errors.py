"""Exception types shared across the package."""


class LidarSynthError(Exception):
    """Base class for all package-specific errors."""


class SceneParseError(LidarSynthError):
    """Raised for malformed scene, recipe, or OBJ input; carries a line number."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)


class FormatError(LidarSynthError):
    """Raised when a dataset file (PLY/PCD/PGM/PPM/CSV/manifest) violates its format."""


class InsufficientDataError(LidarSynthError):
    """Raised when an estimator receives fewer samples than its minimal set."""


class DecompositionError(LidarSynthError):
    """Raised when no essential-matrix candidate passes the cheirality test."""
