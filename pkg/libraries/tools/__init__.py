"""Tool manifests, simulated invocation and session clocks."""

from .clock import VirtualClock, WallClock, make_clock
from .errors import ManifestError, MissingArg, ToolError, TypeMismatch, UnknownTool
from .registry import ToolSet, derive_seed, filter_tools, invoke, load_toolset
from .spec import API_FAILURE, LatencySpec, ParamSpec, ToolKind, ToolOutcome, ToolSpec

__version__ = "1.0.0"
__all__ = [
    "API_FAILURE",
    "LatencySpec",
    "ManifestError",
    "MissingArg",
    "ParamSpec",
    "ToolError",
    "ToolKind",
    "ToolOutcome",
    "ToolSet",
    "ToolSpec",
    "TypeMismatch",
    "UnknownTool",
    "VirtualClock",
    "WallClock",
    "derive_seed",
    "filter_tools",
    "invoke",
    "load_toolset",
    "make_clock",
]
