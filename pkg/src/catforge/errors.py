"""Exception types shared across the package."""


class CatforgeError(Exception):
    """Base class for all catforge errors."""


class InvalidArgumentError(CatforgeError, ValueError):
    """An argument violates a documented precondition."""


class CutoffTooSmallError(CatforgeError):
    """The truncated tail weight of a state exceeds the tolerated 1e-8."""


class ZeroStateError(CatforgeError):
    """A conditional operation produced the zero vector (no heralded event)."""


class ConfigError(CatforgeError):
    """Invalid or incomplete run configuration."""
