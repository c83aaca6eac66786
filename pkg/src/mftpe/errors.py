"""Exception hierarchy shared by every mftpe module."""


class MFTPEError(Exception):
    """Base class for all library errors."""


class NonDivisibleBlockSize(MFTPEError, ValueError):
    pass


class BlockTooSmall(MFTPEError, ValueError):
    pass


class EmptyImage(MFTPEError, ValueError):
    pass


class UnsupportedImage(MFTPEError, ValueError):
    """Raised for PNG modes outside 8-bit grayscale / RGB."""


class ArityMismatch(MFTPEError, ValueError):
    pass


class MissingBlockContext(MFTPEError, ValueError):
    pass


class MalformedEnvelope(MFTPEError, ValueError):
    pass


class ParamMismatch(MFTPEError, ValueError):
    pass


class ProbabilityOverUnity(MFTPEError, ArithmeticError):
    pass


class InstanceTooLarge(MFTPEError, ValueError):
    pass


class DegenerateVariance(MFTPEError, ArithmeticError):
    """Correlation is undefined because one side has zero variance."""


class DimensionMismatch(MFTPEError, ValueError):
    pass
