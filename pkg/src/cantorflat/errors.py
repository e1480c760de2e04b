"""Exception hierarchy shared by all modules."""


class CantorFlatError(Exception):
    """Base class for library errors."""


class ParameterError(CantorFlatError, ValueError):
    """Invalid construction or operation parameter."""


class DomainError(CantorFlatError, ValueError):
    """Argument outside the domain of a function."""


class AddressError(CantorFlatError, IndexError):
    """Rectangle or row address component out of range."""


class DegenerateError(CantorFlatError):
    """The construction cannot be realized (e.g. a non-positive row gap)."""


class UnsupportedError(CantorFlatError):
    """Operation not defined for this kind of construction."""


class NoPlanError(CantorFlatError):
    """The planner exhausted its search limits."""

    def __init__(self, message, near_miss=None):
        super().__init__(message)
        self.near_miss = near_miss


class CertificationError(CantorFlatError):
    """A certificate inequality failed to hold with positive margin."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate
