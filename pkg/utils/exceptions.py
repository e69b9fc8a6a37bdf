class IonTrapError(Exception):
    """Root of all errors raised by the simulator."""


class ParseError(IonTrapError, ValueError):
    """Malformed input text. Carries the 1-based line and column of the offending token."""

    def __init__(self, message: str, line: int = 1, column: int = 1, source: str | None = None):
        self.line = line
        self.column = column
        self.source = source
        self.reason = message
        prefix = f"{source}: " if source else ""
        super().__init__(f"{prefix}line {line}, column {column}: {message}")


class PhysicsValidityError(IonTrapError, ValueError):
    """A request outside the physical regime in which the model is valid."""


class ConvergenceError(IonTrapError, RuntimeError):
    """An iterative solver did not reach its tolerance."""


class TruncationWarning(UserWarning):
    """Population reached the edge of the truncated Fock space."""


class BusLeakageWarning(UserWarning):
    """The bus mode did not return to its initial state after a gate."""


class MarginWarning(UserWarning):
    """A Lamb-Dicke or weak-coupling margin is not small."""
