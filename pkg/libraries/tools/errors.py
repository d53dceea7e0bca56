"""Errors raised by tool manifests and simulated invocations."""

from typing import Any


class ToolError(Exception):
    """Base class for tool registry errors."""


class UnknownTool(ToolError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown tool: {name}")


class MissingArg(ToolError):
    def __init__(self, tool: str, name: str):
        self.tool = tool
        self.name = name
        super().__init__(f"{tool}: missing required argument {name!r}")


class TypeMismatch(ToolError):
    def __init__(self, tool: str, name: str, expected: str, value: Any):
        self.tool = tool
        self.name = name
        self.expected = expected
        super().__init__(
            f"{tool}: argument {name!r} expected {expected}, got {type(value).__name__}"
        )


class ManifestError(ToolError):
    """Raised when a tool manifest fails validation."""
