"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class CapacityError(ValueError):
    """Requested size exceeds what a backend can represent."""


class MitigationError(RuntimeError):
    """Readout calibration too weak for a trustworthy mitigated estimate."""


class LeakageError(ValidationError):
    """In-sample base-model scores passed where out-of-fold scores are required."""


class StageError(RuntimeError):
    """An experiment stage failed; ``stage`` names where."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
