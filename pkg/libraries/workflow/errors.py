"""Errors raised while parsing or validating workflows."""

from typing import Optional


class WorkflowError(Exception):
    """Base class for workflow IR errors."""


class WorkflowSyntaxError(WorkflowError):
    """Raised when DSL source does not match the grammar."""

    def __init__(self, line: int, col: int, expected: str, text: Optional[str] = None):
        self.line = line
        self.col = col
        self.expected = expected
        self.text = text
        location = f"line {line}, col {col}"
        message = f"{location}: expected {expected}"
        if text is not None:
            message += f", got {text!r}"
        super().__init__(message)


class WorkflowValidationError(WorkflowError):
    """Raised when a parsed workflow violates a structural invariant."""

    def __init__(self, message: str, step: Optional[str] = None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
