"""Exception hierarchy shared by every module."""


class MabravoError(Exception):
    """Base class for all library errors."""


class InvalidInputError(MabravoError, ValueError):
    """Malformed geometry or parameters (non-finite, duplicate, degenerate)."""


class NotFoundError(MabravoError, LookupError):
    """Unknown site, or a neighbor relation that does not exist."""


class PreconditionError(MabravoError, ValueError):
    """An operation was called outside its documented domain."""


class ProtocolMisuseError(PreconditionError):
    """A routing step was invoked at a site or for a point outside the AoI."""


class TopologyInconsistencyError(MabravoError):
    """The local view contradicts a valid static Voronoi topology."""


class TtlExpiredError(MabravoError):
    """A message with no hop budget left was about to be forwarded."""
