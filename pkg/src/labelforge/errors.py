"""Exception types shared across the package.

Input-validation failures subclass ValueError so callers can catch broadly;
runtime failures (remote transport, backend contract breaches) subclass
RuntimeError.
"""


class LabelForgeError(Exception):
    """Base class for all package-specific errors."""


class CoordinateError(LabelForgeError, ValueError):
    """A prompt or pixel coordinate falls outside the image bounds."""


class ShapeError(LabelForgeError, ValueError):
    """Two arrays that must share dimensions do not."""


class ConfigError(LabelForgeError, ValueError):
    """A configuration value violates its documented range."""


class FormatError(LabelForgeError, ValueError):
    """A file or byte stream does not match its declared format."""


class ManifestError(LabelForgeError, ValueError):
    """A dataset manifest fails schema validation; message names the JSON path."""


class ContractError(LabelForgeError, RuntimeError):
    """A saliency backend violated its output contract (shape or value range)."""


class TransportError(LabelForgeError, RuntimeError):
    """A remote backend could not be reached or answered with a failure status."""

    def __init__(self, message: str, endpoint: str = "", attempts: int = 0):
        super().__init__(message)
        self.endpoint = endpoint
        self.attempts = attempts
