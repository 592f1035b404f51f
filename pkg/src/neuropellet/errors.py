"""Exception types raised across the package."""


class NeuropelletError(Exception):
    """Base class for all package errors."""


class ParamError(NeuropelletError, ValueError):
    pass


class NonPositiveParam(ParamError):
    pass


class ReferenceTooSmall(ParamError):
    pass


class NegativeDelta(ParamError):
    pass


class InconsistentAlpha(ParamError):
    pass


class ActuatorTooSlow(ParamError):
    """Raised when the launch-slot period exceeds the admissible maximum."""

    def __init__(self, t_c: float, t_c_max: float):
        self.t_c = t_c
        self.t_c_max = t_c_max
        self.min_rate_hz = 1.0 / t_c_max
        super().__init__(
            f"T_c = {t_c:g} s exceeds the admissible maximum {t_c_max:.6g} s; "
            f"the actuator needs a slot rate of at least {self.min_rate_hz:.1f} Hz"
        )


class NegativeDuration(NeuropelletError, ValueError):
    pass


class FlowSetViolation(NeuropelletError, ValueError):
    pass


class NotInJumpSet(NeuropelletError, ValueError):
    pass


class InadmissibleJump(NeuropelletError, ValueError):
    pass


class InvalidInitialState(NeuropelletError, ValueError):
    pass


class TheoremHypothesisViolated(NeuropelletError, ValueError):
    pass


class HorizonTooShort(NeuropelletError, ValueError):
    pass


class MisalignedStep(NeuropelletError, ValueError):
    pass


class IncomparableRuns(NeuropelletError, ValueError):
    pass


class ConfigParseError(NeuropelletError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
