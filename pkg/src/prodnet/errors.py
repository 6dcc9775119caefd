"""Exception types shared across the package."""


class ModelError(ValueError):
    """Base class for invalid economies, networks or analysis requests."""


class InadmissibleNetworkError(ModelError):
    pass


class NotErgodicError(ModelError):
    """The flow matrix is reducible or periodic, so the equilibrium is not unique."""


class DegenerateGameError(ModelError):
    """Some firm has (numerically) zero profit margin, so every strategy is a best response."""


class CapExceededError(ModelError):
    """An enumeration would exceed a configured size cap.

    ``cap_name`` identifies the cap so callers (the CLI in particular) can report it.
    """

    def __init__(self, cap_name: str, limit: int, requested: int):
        self.cap_name = cap_name
        self.limit = limit
        self.requested = requested
        super().__init__(f"{cap_name} exceeded: requested {requested}, cap is {limit}")
