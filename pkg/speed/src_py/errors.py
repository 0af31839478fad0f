from typing import Any, Optional


class SpeedError(Exception):
    """Base class for all errors raised by speed."""
    pass


class DomainError(SpeedError, ValueError):
    """
    Raised when a parameter lies outside the domain an operation is defined on.

    Attributes:
        parameter (str): The name of the offending parameter.
        value (Any): The value that was rejected.
    """

    def __init__(self, parameter: str, value: Any, message: Optional[str] = None):
        self.parameter = parameter
        self.value = value
        super().__init__(message or f"{parameter}={value!r} is outside the valid domain")


class ConfigError(DomainError):
    """Raised when an experiment configuration fails validation."""
    pass


class QuadratureError(SpeedError, ArithmeticError):
    """
    Raised when adaptive quadrature cannot meet the requested tolerance.

    Attributes:
        integral (str): A short name of the integral being evaluated.
        abs_error (float): The error estimate reported by the integrator.
    """

    def __init__(self, integral: str, abs_error: float, message: Optional[str] = None):
        self.integral = integral
        self.abs_error = abs_error
        super().__init__(message or f"Quadrature for {integral} did not converge (error estimate {abs_error:.3e})")


class ShapeMismatchError(SpeedError, ValueError):
    """Raised when ledgers, votes or ciphertext vectors have inconsistent shapes."""
    pass


class BackendError(SpeedError):
    """Raised on cipher backend misuse, e.g. combining ciphertexts of two backends."""
    pass


class VotesFormatError(SpeedError):
    """
    Raised upon a malformed votes file.

    Attributes:
        row (Optional[int]): The 0-based query row that failed, if known.
        line (Optional[int]): The 1-based line in the file, if known.
    """

    def __init__(self, message: str, row: Optional[int] = None, line: Optional[int] = None):
        self.row = row
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if row is not None:
            where.append(f"row {row}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
