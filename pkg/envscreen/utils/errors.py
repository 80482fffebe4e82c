"""
Exceptions raised by envscreen.

Every contract failure of a public operation maps to one class below; all of
them derive from :class:`EnvscreenError` so callers (and the scenario runner)
can separate toolkit errors from programming errors.
"""


class EnvscreenError(Exception):
    """Base class of all toolkit errors."""


class DomainError(EnvscreenError, ValueError):
    """A point or shift lies outside [0, 1]."""


class AlignmentError(EnvscreenError, ValueError):
    """A shift is not a positive integer multiple of the grid step."""


class ArgumentError(EnvscreenError, ValueError):
    """Arguments are malformed, mismatched or mislabeled."""


class EvaluationError(EnvscreenError, ArithmeticError):
    """A user-supplied callable failed or returned a non-finite value."""

    def __init__(self, message, index=None):
        if index is not None:
            message = f"{message} (grid index {index})"
        super().__init__(message)
        self.index = index


class NotOptimalError(EnvscreenError):
    """A candidate action beats the asserted maximizer."""

    def __init__(self, t, candidate, gain):
        super().__init__(
            f"maximizer is not optimal at t={t:.6g}: candidate {candidate!r} gains {gain:.3e}"
        )
        self.t = t
        self.candidate = candidate
        self.gain = gain


class NotOntoError(EnvscreenError):
    """Payment inversion could not bracket the target payoff."""


class ModelViolationError(EnvscreenError):
    """A sampled probe found an assumption of the model violated."""


class PreconditionError(EnvscreenError):
    """An operation's precondition does not hold."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class NumericError(EnvscreenError, ArithmeticError):
    """An iterative numeric routine failed to terminate."""


class ConfigError(EnvscreenError):
    """A scenario config is malformed."""

    def __init__(self, message, field=None, line=None):
        where = []
        if field is not None:
            where.append(f"field {field}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} [{', '.join(where)}]"
        super().__init__(message)
        self.field = field
        self.line = line
