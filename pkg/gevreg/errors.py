"""Exception hierarchy shared by the library and the command-line front end."""


class GevRegError(ValueError):
    """Base class of every error raised on purpose by gevreg."""


class ConfigError(GevRegError):
    """Invalid or malformed configuration.

    Attributes:
        line (int | None): 1-based line number in the config file, if known.
    """

    def __init__(self, message: str, line: int = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PhysicsError(GevRegError):
    """Physically meaningless input (non-Hermitian Hamiltonian, missing time constant, ...)."""


class SequenceError(GevRegError):
    """Pulse sequence that cannot be built with the requested parameters."""


class FitError(GevRegError):
    """A fit did not converge or found no minimum inside its bounds.

    Attributes:
        residuals (list): Objective values visited before giving up.
    """

    def __init__(self, message: str, residuals=None):
        self.residuals = list(residuals) if residuals is not None else []
        super().__init__(message)
