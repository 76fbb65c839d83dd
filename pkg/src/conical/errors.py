class ConicalError(ValueError):
    """Base class for input and model errors raised by this package."""


class InsufficientProfile(ConicalError):
    """A profiled field was queried at a place its profile does not cover."""


class CertificationUnsupported(ConicalError):
    pass


class UnsupportedTensor(ConicalError):
    """Local or global tensor structure cannot be decided from the stored data."""


class FieldMapError(ConicalError):
    pass


class WindowError(ConicalError):
    pass


class CurveError(ConicalError):
    pass
