"""Exception hierarchy shared across the stack."""


class CspError(Exception):
    """Base class for all protocol-stack errors."""


class InvalidConfig(CspError):
    pass


class LengthExceedsBuffer(CspError):
    pass


class LengthMismatch(CspError):
    pass


class PoolExhausted(CspError):
    pass


class StaleHandle(CspError):
    pass


class InvalidId(CspError):
    pass


class QueueFull(CspError):
    pass


class PortInUse(CspError):
    pass


class AlreadyInitialized(CspError):
    pass


class CorruptCorpus(CspError):
    pass
