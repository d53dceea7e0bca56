"""Workflow IR, its line-oriented DSL and static analyses."""

from .analysis import (
    DEFAULT_PATH_CAP,
    always_terminates,
    decision_points,
    enumerate_paths,
    sequence_terminates,
    step_terminates,
    token_count,
    validate_workflow,
)
from .conditions import Decision, attribute_holds, decide
from .dsl import looks_like_action, parse_workflow, serialize_workflow
from .errors import WorkflowError, WorkflowSyntaxError, WorkflowValidationError
from .ir import (
    INFO_SUFFIX,
    TERMINAL_TOOL,
    Action,
    ActionKind,
    ArgExpr,
    ArgKind,
    Branch,
    Condition,
    ConditionKind,
    PathSet,
    Step,
    Workflow,
    iter_steps,
)
from .paths import MISSING, assign, flatten, lookup

__version__ = "1.0.0"
__all__ = [
    "DEFAULT_PATH_CAP",
    "INFO_SUFFIX",
    "MISSING",
    "TERMINAL_TOOL",
    "Action",
    "ActionKind",
    "ArgExpr",
    "ArgKind",
    "Branch",
    "Condition",
    "ConditionKind",
    "Decision",
    "PathSet",
    "Step",
    "Workflow",
    "WorkflowError",
    "WorkflowSyntaxError",
    "WorkflowValidationError",
    "always_terminates",
    "assign",
    "attribute_holds",
    "decide",
    "decision_points",
    "enumerate_paths",
    "flatten",
    "iter_steps",
    "looks_like_action",
    "lookup",
    "parse_workflow",
    "sequence_terminates",
    "serialize_workflow",
    "step_terminates",
    "token_count",
    "validate_workflow",
]

from .WorkflowLibrary import WorkflowLibrary  # noqa: E402

__all__.append("WorkflowLibrary")
