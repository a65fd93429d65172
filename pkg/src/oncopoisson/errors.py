"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument or model parameter is outside its valid domain."""


class StateError(RuntimeError):
    """An operation was called on an object in the wrong state."""
