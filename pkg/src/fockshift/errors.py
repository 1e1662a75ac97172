class PreconditionError(ValueError):
    """Input violates a documented precondition."""


class CapExceeded(RuntimeError):
    """Requested truncation exceeds the configured resource cap."""
