"""Exceptions raised by mollifem, with the CLI exit code each maps to."""


class MollifemError(ValueError):
    # invalid user input unless a subclass says otherwise
    exit_code = 3


# Mesh and basis

class NodeCountTooSmall(MollifemError):
    pass


class EvenNodeCount(MollifemError):
    pass


class IndexOutOfRange(MollifemError, IndexError):
    pass


class LengthMismatch(MollifemError):
    pass


# Kernels

class NotAProbabilityWeight(MollifemError):
    pass


class OrderCapExceeded(MollifemError):
    pass


# Quadrature and rates

class InvalidGrid(MollifemError):
    pass


class InvalidRateData(MollifemError):
    pass


# CLI facing

class ConfigError(MollifemError):
    exit_code = 2


class MissingFile(ConfigError):
    pass


class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(MollifemError):
    pass


class UnknownKernel(ValidationError):
    pass


class UnknownFamily(ValidationError):
    pass


class VerificationFailure(MollifemError):
    exit_code = 4


IO_EXIT_CODE = 5
