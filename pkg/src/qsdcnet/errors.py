"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument or constructed value violates a documented contract."""


class ProtocolViolationError(RuntimeError):
    """A party's classical announcement breaks the protocol's obligations."""


class CapacityError(ValueError):
    """A message does not fit in the positions available for encoding."""


class ConfigError(ValueError):
    """A configuration file or value cannot be accepted."""
