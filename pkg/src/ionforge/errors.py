"""Exception types. ``exit_code`` is what the CLI returns for each class."""


class IonForgeError(Exception):
    exit_code = 1


class ConfigError(IonForgeError, ValueError):
    """Bad configuration text or value; ``key``/``line`` locate it when known."""

    exit_code = 2

    def __init__(self, message, key=None, line=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if key is not None:
            loc.append(f"key {key!r}")
        prefix = f"{', '.join(loc)}: " if loc else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line


class PhysicsError(IonForgeError, ValueError):
    """An input violates a physical domain or precondition."""

    exit_code = 3


class DomainError(PhysicsError):
    pass


class PreconditionError(PhysicsError):
    pass


class TruncationError(PhysicsError):
    """Phonon amplitude reached the Fock-space cutoff."""


class ConvergenceError(IonForgeError, RuntimeError):
    exit_code = 4

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
