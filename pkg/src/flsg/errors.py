"""Exception hierarchy shared across the aggregation pipeline and the service."""


class FlsgError(Exception):
    """Base class for all errors raised by this package."""


# -- model serialization ---------------------------------------------------

class SerializationError(FlsgError):
    pass


class BadMagic(SerializationError):
    pass


class UnsupportedVersion(SerializationError):
    pass


class UnsupportedDtype(SerializationError):
    pass


class LengthMismatch(SerializationError):
    pass


class NonFiniteValue(SerializationError):
    pass


# -- pipeline --------------------------------------------------------------

class DimensionMismatch(FlsgError):
    pass


class StageCountZero(FlsgError):
    pass


class NoAcceptedModels(FlsgError):
    pass


class NonFiniteResult(FlsgError):
    pass


# -- scheduler service -----------------------------------------------------

class ProtocolError(FlsgError):
    pass


class ProtocolOrderViolation(ProtocolError):
    pass


class AuthFailure(ProtocolError):
    pass


class DuplicateSubmission(ProtocolError):
    pass


class UnknownRound(ProtocolError):
    pass


class InsufficientModels(ProtocolError):
    pass


class AttestationFailure(ProtocolError):
    pass


class FrameError(ProtocolError):
    pass
