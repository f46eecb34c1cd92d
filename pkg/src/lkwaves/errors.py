"""Exception and warning types raised across the package."""


class LkwavesError(Exception):
    """Base class for all package errors."""


class NotRepresentable(LkwavesError, ValueError):
    """The integer is not a sum of two squares, so no torus eigenvalue exists."""


class OrderTooLarge(LkwavesError, ValueError):
    pass


class DomainError(LkwavesError, ValueError):
    pass


class OddIndex(LkwavesError, ValueError):
    pass


class EpcDegenerate(LkwavesError, ValueError):
    """|mu_hat(4)| = 1: one of the second-derivative standardisations is singular."""


class ResolutionTooLow(LkwavesError, ValueError):
    pass


class OrderNotSupported(LkwavesError, ValueError):
    pass


class InvalidConfig(LkwavesError, ValueError):
    pass


class IoFailure(LkwavesError, OSError):
    pass


class MalformedRecord(LkwavesError, ValueError):
    pass


class EpsTooSmallForGrid(UserWarning):
    """The epsilon band is resolved by fewer than three grid cells."""


class PolarExclusion(UserWarning):
    """Grid nodes too close to a pole were dropped."""
