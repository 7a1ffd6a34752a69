"""Exception types shared across modules."""


class NumericalError(RuntimeError):
    """A solver or decomposition failed numerically (distinct from bad configuration)."""
