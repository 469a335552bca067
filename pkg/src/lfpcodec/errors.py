class LfpError(RuntimeError):
    """Base class for every failure the toolkit reports to its caller."""

    category = "internal"
    exit_code = 3


class UsageError(LfpError):
    category = "usage"
    exit_code = 1


class ConfigurationError(UsageError):
    category = "config"


class InputError(LfpError):
    category = "input"
    exit_code = 2


class DimensionError(InputError):
    category = "dimension"


class ParseError(InputError):
    category = "parse"

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IntegrityError(InputError):
    category = "integrity"


class DecodeError(InputError):
    category = "decode"

    def __init__(self, message: str, frame: int | None = None) -> None:
        self.frame = frame
        if frame is not None:
            message = f"frame {frame}: {message}"
        super().__init__(message)


class NumericError(LfpError):
    category = "numeric"
    exit_code = 3


class DomainError(NumericError):
    category = "domain"


class BackendError(LfpError):
    category = "backend"
    exit_code = 3


class ModelError(LfpError):
    category = "model"
    exit_code = 3
