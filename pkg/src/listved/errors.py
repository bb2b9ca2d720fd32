"""Exception hierarchy shared by all modules."""


class ListVedError(Exception):
    """Base class; the CLI turns any of these into a one-line diagnostic."""


class EmptyList(ListVedError, ValueError):
    pass


class ZeroVector(ListVedError, ValueError):
    pass


class NumericalFailure(ListVedError, ArithmeticError):
    pass


class EmptyRegion(ListVedError, ValueError):
    """The half-spaces have no common point: no received vector is closer to
    every alternative than to the transmitted one, so the VED is infinite."""


class MemoryTooLarge(ListVedError, ValueError):
    pass


class Explosion(ListVedError, RuntimeError):
    pass


class DuplicateAlternative(ListVedError, ValueError):
    pass


class NotReached(ListVedError, RuntimeError):
    pass


class LengthMismatch(ListVedError, ValueError):
    pass


class InvalidConfig(ListVedError, ValueError):
    pass
