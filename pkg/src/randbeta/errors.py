"""Exception types shared by all modules."""


class DomainError(ValueError):
    """A point or parameter lies outside the interval an operation is defined on."""


class ContractError(ValueError):
    """Inputs violate an operation's preconditions."""


class ResourceError(RuntimeError):
    """A configured size cap would be exceeded."""


class ConsistencyError(RuntimeError):
    """Numeric drift produced a state that is impossible for valid inputs."""


class TruncationError(ResourceError):
    """A tower point was mapped above the working truncation depth."""
