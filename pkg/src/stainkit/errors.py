"""Exception hierarchy shared by all stainkit modules."""


class StainkitError(Exception):
    """Base class for every error raised by stainkit."""


class ParameterError(StainkitError, ValueError):
    """An argument is outside its valid domain (bad epsilon, shape mismatch, ...)."""


class EmptyHistogram(StainkitError):
    """The image carries no histogram weight (e.g. an all-black image)."""


class MethodFailure(StainkitError):
    """A stain separation method could not run on the given image."""


class LowSignal(MethodFailure):
    """Too few tissue pixels above the optical density threshold."""


class DegenerateRank(MethodFailure):
    """Optical density vectors span fewer than two directions."""


class UnsupportedFormat(StainkitError):
    """File exists but its pixel format is not handled."""


class IoFailure(StainkitError, OSError):
    """Reading or writing a file failed."""


class HeterogeneousRows(StainkitError, ValueError):
    """Report rows do not share one column layout."""
