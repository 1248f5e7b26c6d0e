"""Shared exception types."""


class GWQError(Exception):
    """Base class for engine errors."""


class VarTableMismatch(GWQError):
    """Two series from different variable tables were combined."""


class NonInvertible(GWQError):
    """Series inversion requires a nonzero constant term."""


class PreconditionError(GWQError):
    """An operation's precondition on its series argument failed."""


class NonContraction(GWQError):
    """Fixed-point iteration did not freeze degree by degree."""


class WindowOverflow(GWQError):
    """A Laurent operation needed a power outside the z window."""


class ResonantParameter(GWQError):
    """A sampled deformation parameter hit the resonant set."""


class ConfigError(GWQError):
    """Invalid run configuration."""
