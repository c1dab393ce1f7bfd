"""Exception hierarchy shared by every fpc module."""


class FPCError(Exception):
    """Base class for all fpc errors."""


class NotCoprime(FPCError, ValueError):
    pass


class OutOfDomain(FPCError, ValueError):
    pass


class OutOfRange(FPCError, ValueError):
    pass


class DomainError(FPCError, ValueError):
    pass


class RangeTooLarge(FPCError, ValueError):
    pass


class DegenerateG(FPCError, ValueError):
    pass


class NoApplicableLemma(FPCError, ValueError):
    pass


class WrongRegion(FPCError, ValueError):
    pass


class NoCertificate(FPCError):
    pass


class CheckpointCorrupt(FPCError):
    pass
