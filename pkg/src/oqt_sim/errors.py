"""Exception hierarchy shared by every oqt-sim module."""


class OQTError(Exception):
    """Base class for all oqt-sim failures."""


class ContractViolation(OQTError):
    """An operation was called outside its precondition."""


class ConfigurationError(OQTError):
    """A scenario or target configuration cannot be realized."""


class StepSizeError(OQTError):
    """An integrator step left its stability region; use a smaller dt."""

    def __init__(self, message: str, dt: float | None = None):
        super().__init__(message)
        self.dt = dt


class DomainError(OQTError):
    """A numeric argument lies outside the domain of the operation."""


class InsufficientDataError(OQTError):
    """Too few samples to support a statistical verdict."""


class InternalError(OQTError):
    """A state that construction should make impossible was reached."""
