"""Exception hierarchy shared by every module of the package."""


class GroupoidError(Exception):
    """Base class for all errors raised by liegroupoid."""


class SpecMismatchError(GroupoidError, ValueError):
    """Two jets with different (directions, order) were combined."""


class DomainError(GroupoidError, ValueError):
    """An elementary function or division was evaluated outside its domain."""

    def __init__(self, function: str, value: float, reason: str = "") -> None:
        self.function = function
        self.value = value
        msg = f"{function}: argument {value!r} outside domain"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class OutOfDomainError(GroupoidError, ValueError):
    """A chart was evaluated outside its declared radii."""


class ParseError(GroupoidError, ValueError):
    """Syntax or name error in an expression; ``offset`` is a byte offset."""

    def __init__(self, message: str, offset: int, source: str = "") -> None:
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class UnboundVariableError(GroupoidError, LookupError):
    pass


class ConvergenceError(GroupoidError, RuntimeError):
    """Newton iteration failed to reach the requested tolerance."""


class SingularJacobianError(ConvergenceError):
    pass
