"""Exception types shared across the pipeline."""


class ShuttleSpeedError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class InputContractError(ShuttleSpeedError, ValueError):
    """An argument violated a documented precondition."""

    code = "input_contract"


class DegenerateCalibrationError(ShuttleSpeedError, ValueError):
    """Calibration reference points coincide (zero pixel distance)."""

    code = "degenerate_calibration"


class CalibrationMissingError(ShuttleSpeedError, ValueError):
    """An operation that needs a scale calibration was run without one."""

    code = "calibration_missing"


class InsufficientDataError(ShuttleSpeedError, ValueError):
    """Not enough usable trajectory points to compute a result."""

    code = "insufficient_data"


class StreamParseError(ShuttleSpeedError, ValueError):
    """A structured-text file could not be parsed.

    Carries the 1-based line number where parsing failed.
    """

    code = "parse"

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class StreamValidationError(ShuttleSpeedError, ValueError):
    """A parsed record violated a format invariant (e.g. out-of-bounds box)."""

    code = "validation"

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
