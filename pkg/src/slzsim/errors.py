"""Exception types raised across the package."""


class SlzSimError(Exception):
    """Base class for all package-specific errors."""


class BehindCamera(SlzSimError):
    """A world point projects to non-positive depth and is not imaged."""


class DegenerateView(SlzSimError):
    """An image corner ray does not intersect the head plane in front of the camera."""


class MalformedFile(SlzSimError):
    """A density raster, annotation, pose or log file failed to parse."""


class SingularInnovation(SlzSimError):
    """The Kalman innovation covariance is numerically singular."""


class PlacementFailure(SlzSimError):
    """Rejection sampling could not place actors without overlap."""


class EmptyGroundTruth(SlzSimError):
    """No ground-truth landing zones are available for comparison."""


class ConfigError(SlzSimError):
    """A run configuration file is missing or invalid."""
