"""
Error types

Every failure the lab can report maps to one of these classes. The exit code
attached to each class is what main.py returns to the shell.
"""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5


class LabError(Exception):
    """Base class for all errors raised by the lab."""
    exit_code = EXIT_NUMERICAL


class DomainError(LabError, ValueError):
    """Parameters outside the documented domain of an operation."""
    exit_code = EXIT_DOMAIN


class InstabilityError(LabError):
    """The fluctuation matrix has a negative eigenvalue (z is not a minimum)."""
    exit_code = EXIT_NUMERICAL


class NumericalError(LabError):
    """Internal solver failure: no bracket, no convergence, invalid Gaussian state."""
    exit_code = EXIT_NUMERICAL


class ConfigurationError(LabError):
    """Invalid configuration or command-line usage."""
    exit_code = EXIT_USAGE


def exit_code_for(exc):
    """
    Maps an exception to a process exit code.

    Args:
        exc: The exception raised by a command.

    Returns:
        int: The exit code.
    """
    if isinstance(exc, LabError):
        return exc.exit_code
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_NUMERICAL
