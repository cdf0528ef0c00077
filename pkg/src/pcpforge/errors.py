"""Exception hierarchy shared by every module."""


class ForgeError(Exception):
    """Base class for all library errors."""


class UnknownVariable(ForgeError):
    pass


class ArityMismatch(ForgeError):
    pass


class EmptyInstance(ForgeError):
    pass


class UnknownEdge(ForgeError):
    pass


class HypergraphMismatch(ForgeError):
    pass


class DomainMismatch(ForgeError):
    pass


class ParseError(ForgeError):
    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class TooLarge(ForgeError):
    pass


class ExpanderNotFound(ForgeError):
    pass


class SizeMismatch(ForgeError):
    pass


class NonBinaryInstance(ForgeError):
    pass


class NotRegular(ForgeError):
    pass


class TesterTooLarge(ForgeError):
    pass


class ArityTooHigh(ForgeError):
    pass


class NotLabelCover(ForgeError):
    pass


class NotE3SAT(ForgeError):
    pass


class NotAClique(ForgeError):
    pass


class InconsistentClique(ForgeError):
    pass


class BlockMissing(ForgeError):
    pass


class SupportTooLarge(ForgeError):
    pass


class OddLength(ForgeError):
    pass
