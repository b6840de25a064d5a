"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument or input violates a documented precondition."""


class NumericalError(RuntimeError):
    """A dense linear-algebra routine failed to produce a usable result."""


def require(condition: bool, message: str) -> None:
    """Raise :class:`ContractViolation` with ``message`` unless ``condition``."""
    if not condition:
        raise ContractViolation(message)
