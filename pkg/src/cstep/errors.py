class CStepError(Exception):
    """Base class for package errors."""


class ContractViolation(CStepError, ValueError):
    """A caller broke an operation's precondition."""


class IntegrationError(CStepError, ArithmeticError):
    def __init__(self, step, message="non-finite state"):
        super().__init__(f"{message} at integration step {step}")
        self.step = step


class ConfigError(CStepError, ValueError):
    """Invalid or infeasible configuration.

    ``field`` names the dotted config path when known.
    """

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class TrainingError(CStepError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
