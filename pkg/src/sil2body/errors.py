"""Exception hierarchy shared by all modules."""


class Sil2BodyError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(Sil2BodyError, ValueError):
    pass


class ZeroVarianceError(Sil2BodyError):
    """The dataset has no shape variation to model."""


class RenderError(Sil2BodyError):
    pass


class NoContourError(Sil2BodyError):
    pass


class StateError(Sil2BodyError, RuntimeError):
    """An operation was called out of order (e.g. backward before forward)."""


class FormatError(Sil2BodyError):
    """A container file has the wrong magic bytes, version or size."""


class NumericalError(Sil2BodyError, ArithmeticError):
    """A computation produced non-finite values (e.g. a diverging loss)."""
