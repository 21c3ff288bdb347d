"""Exception types shared across the package."""


class CamplaceError(Exception):
    """Base class for all package errors."""


class SceneValidationError(CamplaceError):
    """A scene, grid, or input file violates an invariant."""


class UnreachableError(CamplaceError):
    """The requested start point cannot reach the destination."""


class ConfigurationError(CamplaceError):
    """A solver or optimizer parameter is out of range."""


class PathExtractionError(CamplaceError):
    """Characteristic descent failed to reach the destination.

    Carries the partial path assembled so far in ``partial_path``.
    """

    def __init__(self, message, partial_path=None):
        super().__init__(message)
        self.partial_path = partial_path
