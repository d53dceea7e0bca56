"""Static analyses over workflows: validation, token counts and path enumeration."""

from typing import Iterable, List, Optional, Set, Tuple

from .dsl import looks_like_action, serialize_workflow
from .errors import WorkflowValidationError
from .ir import (
    ActionKind,
    ArgKind,
    PathSet,
    Step,
    Workflow,
    body_is_transparent,
    branches_closed,
)

DEFAULT_PATH_CAP = 100_000


def sequence_terminates(steps: Tuple[Step, ...]) -> bool:
    """True when running the steps in order always ends in a terminal or a jump."""
    return any(step_terminates(step) for step in steps)


def step_terminates(step: Step) -> bool:
    if step.ends_unconditionally:
        return True
    if not step.branches or not branches_closed(step.branches):
        return False
    return all(sequence_terminates(branch.body) for branch in step.branches)


def always_terminates(w: Workflow) -> bool:
    """Every execution of the workflow reaches a terminal action."""
    return bool(w.steps) and step_terminates(w.steps[-1])


def token_count(w: Workflow) -> int:
    """Whitespace-delimited tokens of the canonical body (header excluded)."""
    if not w.steps:
        return 0
    return len(serialize_workflow(w, header=False).split())


def decision_points(w: Workflow) -> int:
    return sum(1 for step, _ in w.iter_steps() if step.branches)


def validate_workflow(
    w: Workflow,
    tool_names: Optional[Iterable[str]] = None,
    max_depth: int = 8,
) -> None:
    """
    Check the structural invariants of a workflow.

    Raises:
        WorkflowValidationError: On the first violated invariant
    """
    if not w.steps:
        raise WorkflowValidationError("no terminal: workflow has no steps")

    known_tools = set(tool_names) if tool_names is not None else None
    called = w.tool_names()
    top_labels = {step.label: step.key for step in w.steps}
    seen: Set[str] = set()
    previous: Optional[Tuple[int, ...]] = None

    def check(steps: Tuple[Step, ...], parent: Optional[Step], top: Optional[Step], depth: int):
        nonlocal previous
        if depth > max_depth:
            raise WorkflowValidationError(
                f"branch depth {depth} exceeds maximum {max_depth}", steps[0].label
            )
        for step in steps:
            _check_label(step, parent, seen, previous)
            previous = step.key
            seen.add(step.label)
            anchor = top or step
            _check_step(step, anchor, known_tools, called, top_labels)
            for branch in step.branches:
                if not branch.body:
                    raise WorkflowValidationError("empty branch body", step.label)
                check(branch.body, step, anchor, depth + 1)

    check(w.steps, None, None, 0)

    if not always_terminates(w):
        raise WorkflowValidationError(
            "no terminal: last step does not always end the case", w.steps[-1].label
        )


def _check_label(step: Step, parent: Optional[Step], seen: Set[str], previous) -> None:
    try:
        key = step.key
    except ValueError:
        raise WorkflowValidationError("malformed label", step.label) from None
    if step.label in seen:
        raise WorkflowValidationError("duplicate step id", step.label)
    if previous is not None and key <= previous:
        raise WorkflowValidationError("step ids must strictly increase", step.label)
    if parent is None:
        if len(key) != 1:
            raise WorkflowValidationError("top-level step ids have one component", step.label)
    elif key[:-1] != parent.key or len(key) != len(parent.key) + 1:
        raise WorkflowValidationError(f"nested step must extend {parent.label}", step.label)


def _check_step(step: Step, top: Step, known_tools, called, top_labels) -> None:
    prose = step.prose
    if prose != prose.strip() or "\n" in prose:
        raise WorkflowValidationError("prose must be a single trimmed line", step.label)
    if prose.startswith("[always]") or (prose and looks_like_action(prose)):
        raise WorkflowValidationError("prose reads as an action", step.label)

    conditions = [branch.condition.render() for branch in step.branches]
    if len(set(conditions)) != len(conditions):
        raise WorkflowValidationError("duplicate branch condition", step.label)

    for index, action in enumerate(step.actions):
        last = index == len(step.actions) - 1
        if action.ends_step and (not last or step.branches):
            raise WorkflowValidationError(
                f"{action.kind.value} must be the final action of a step without branches",
                step.label,
            )
        if action.calls_tool:
            if not action.tool:
                raise WorkflowValidationError("tool call without a tool", step.label)
            if known_tools is not None and action.tool not in known_tools:
                raise WorkflowValidationError(f"unresolved tool {action.tool!r}", step.label)
            for name, expr in action.args:
                if expr.kind is ArgKind.OUTPUT and expr.tool not in called:
                    raise WorkflowValidationError(
                        f"argument {name!r} reads output of uncalled tool {expr.tool!r}",
                        step.label,
                    )
        elif action.kind is ActionKind.GOTO:
            target = action.target
            if target not in top_labels:
                raise WorkflowValidationError(f"goto to undefined step {target}", step.label)
            if top_labels[target] <= top.key:
                raise WorkflowValidationError(f"goto must jump forward (to {target})", step.label)
        elif action.kind is ActionKind.PROMPT and not action.key:
            raise WorkflowValidationError("prompt without a key", step.label)


def enumerate_paths(w: Workflow, cap: int = DEFAULT_PATH_CAP) -> PathSet:
    """
    Enumerate distinct tool-name sequences over every branch choice.

    Branch sets without a complementary pair of conditions also allow falling
    through; bodies that never call a tool, jump or terminate collapse into
    that fall-through alternative.

    Args:
        w: Workflow to enumerate
        cap: Maximum number of distinct paths to collect

    Returns:
        PathSet with ``truncated`` set when more than ``cap`` paths exist
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")

    top_index = {step.label: i for i, step in enumerate(w.steps)}
    paths: List[Tuple[str, ...]] = []
    seen: Set[Tuple[str, ...]] = set()
    stack = [(((w.steps, 0),), ())]

    while stack:
        frames, acc = stack.pop()
        while True:
            if not frames:
                path = acc
                break
            steps, index = frames[-1]
            if index >= len(steps):
                frames = frames[:-1]
                continue
            step = steps[index]
            frames = frames[:-1] + ((steps, index + 1),)
            path = None
            for action in step.actions:
                if action.calls_tool:
                    acc = acc + (action.tool,)
                if action.kind is ActionKind.TERMINAL:
                    path = acc
                    break
                if action.kind is ActionKind.GOTO:
                    frames = ((w.steps, top_index[action.target]),)
                    break
            if path is not None:
                break
            if step.ends_unconditionally or not step.branches:
                continue

            alternatives = []
            fall_through = False
            for branch in step.branches:
                if body_is_transparent(branch.body):
                    fall_through = True
                else:
                    alternatives.append(frames + ((branch.body, 0),))
            if fall_through or not branches_closed(step.branches):
                alternatives.append(frames)
            for alternative in reversed(alternatives[1:]):
                stack.append((alternative, acc))
            frames = alternatives[0]

        if path in seen:
            continue
        if len(paths) >= cap:
            return PathSet(tuple(paths), truncated=True)
        seen.add(path)
        paths.append(path)

    return PathSet(tuple(paths), truncated=False)

