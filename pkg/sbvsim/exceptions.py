"""
SBV Simulator Exceptions
Error hierarchy shared by the computation modules and the command line front end
"""

from typing import Optional


class SbvSimError(Exception):
    """Base class for every error raised by the simulator"""

    exit_code = 3


class ConfigError(SbvSimError):
    """Configuration text could not be parsed"""

    exit_code = 2

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f", line {line}"
            location += ": "
        super().__init__(f"{location}{message}")


class ValidationError(SbvSimError):
    """A parsed value violates a constraint"""

    exit_code = 2


class SchemaError(ValidationError):
    """A CSV file does not match the expected column schema"""


class DomainError(SbvSimError, ValueError):
    """Argument outside the domain of an operation"""


class ModelValidityError(DomainError):
    """Frequency outside the validity range of the cable model"""


class ScenarioError(DomainError):
    """Inconsistent link scenario"""
