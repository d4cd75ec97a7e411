"""Exception hierarchy shared by the library and the CLI."""


class QuantumGraphError(Exception):
    """Base class for all library errors."""


class DomainError(QuantumGraphError, ValueError):
    """Input is well formed but outside the supported physics (CLI exit code 2)."""


class GraphError(DomainError):
    """Invalid graph definition."""


class TunnelingRegimeError(GraphError):
    """A bond potential reaches or exceeds the energy (lambda >= 1)."""


class UnsupportedBoundaryError(DomainError):
    pass


class NotRegularError(DomainError):
    """The spectral equation violates sum |a_i| < 1."""

    def __init__(self, alpha):
        self.alpha = alpha
        super().__init__(f"regularity condition violated (alpha={alpha:.6f})")


class BracketError(DomainError):
    """No unique sign change where regularity guarantees one."""


class TermCountError(DomainError):
    pass


class QuadratureError(DomainError):
    pass


class ConfigError(QuantumGraphError):
    """Malformed graph definition file (CLI exit code 1)."""
