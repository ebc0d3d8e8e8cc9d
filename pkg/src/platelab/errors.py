"""Exception types raised by platelab."""


class PlateLabError(Exception):
    """Base class for all platelab errors."""


class SpectrumFileError(PlateLabError, ValueError):
    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{self.path}:{lineno}: {message}")


class SingularSystemError(PlateLabError, ArithmeticError):
    """A block system (i*lambda - M) has a pivot below the singularity floor."""


class JacobiConvergenceError(PlateLabError, RuntimeError):
    """Cyclic Jacobi did not reach tolerance within the sweep budget."""


class TooFewSamplesError(PlateLabError, ValueError):
    pass


class RangeError(PlateLabError, ValueError):
    """Parameters fall outside the range where a claim or item is defined."""
