"""Cleanup pass: merge tool-free steps, renumber, and make sure the case closes."""

from dataclasses import replace
from typing import Dict, List, Optional, Set, Tuple

from libraries.workflow import (
    TERMINAL_TOOL,
    Action,
    ActionKind,
    ArgExpr,
    Branch,
    Step,
    Workflow,
    always_terminates,
)

from .prune import goto_targets
from .result import EditKind, TrimEdit


def mergeable(step: Step) -> bool:
    """A step with nothing left to execute: no calls, jumps, terminals or branches."""
    if step.branches or step.must_always:
        return False
    return not any(action.calls_tool or action.ends_step for action in step.actions)


def _merge(steps: Tuple[Step, ...], targets: Set[str], edits: List[TrimEdit]) -> Tuple[Step, ...]:
    merged: List[Step] = []
    absorbed: Dict[str, List[str]] = {}
    for step in steps:
        if step.branches:
            step = replace(
                step,
                branches=tuple(
                    Branch(branch.condition, _merge(branch.body, targets, edits))
                    for branch in step.branches
                ),
            )
        if merged and mergeable(merged[-1]) and mergeable(step) and step.label not in targets:
            head = merged[-1]
            prose = "; ".join(p for p in (head.prose, step.prose) if p)
            merged[-1] = replace(head, prose=prose, actions=head.actions + step.actions)
            absorbed.setdefault(head.label, []).append(step.label)
            continue
        merged.append(step)
    for label, labels in absorbed.items():
        edits.append(TrimEdit(EditKind.MERGED_STEPS, label, "merged " + ", ".join(labels)))
    return tuple(merged)


def _relabel(step: Step, label: str) -> Step:
    counter = 0
    branches = []
    for branch in step.branches:
        body = []
        for child in branch.body:
            counter += 1
            body.append(_relabel(child, f"{label}.{counter}"))
        branches.append(Branch(branch.condition, tuple(body)))
    return replace(step, label=label, branches=tuple(branches))


def _retarget(step: Step, mapping: Dict[str, str]) -> Step:
    actions = tuple(
        replace(action, target=mapping[action.target])
        if action.kind is ActionKind.GOTO
        else action
        for action in step.actions
    )
    branches = tuple(
        Branch(branch.condition, tuple(_retarget(child, mapping) for child in branch.body))
        for branch in step.branches
    )
    return replace(step, actions=actions, branches=branches)


def renumber(steps: Tuple[Step, ...], edits: List[TrimEdit]) -> Tuple[Step, ...]:
    """Relabel top-level steps 1..N, nested steps parent.i, and rewrite jumps."""
    mapping = {step.label: str(position) for position, step in enumerate(steps, start=1)}
    for old, new in mapping.items():
        if old != new:
            edits.append(TrimEdit(EditKind.RENUMBERED, old, f"now {new}"))
    relabelled = [_relabel(step, mapping[step.label]) for step in steps]
    return tuple(_retarget(step, mapping) for step in relabelled)


def pass3_cleanup(
    w: Workflow, terminal_tool: str = TERMINAL_TOOL, customer_id: Optional[int] = None
) -> Tuple[Workflow, List[TrimEdit]]:
    """
    Merge consecutive tool-free steps, renumber 1..N and close every path.

    Args:
        w: Output of the fidelity pass
        terminal_tool: Case-closing tool appended when a path could end open
        customer_id: Inlined into an appended terminal call when known

    Returns:
        (workflow, edits)
    """
    edits: List[TrimEdit] = []
    steps = _merge(w.steps, goto_targets(w.steps), edits)

    if not steps or not always_terminates(replace(w, steps=steps)):
        argument = ArgExpr.attr("customer_id") if customer_id is None else ArgExpr.literal(customer_id)
        closing = Step(
            label=str(max((step.key[0] for step in steps), default=0) + 1),
            actions=(
                Action(ActionKind.TERMINAL, tool=terminal_tool, args=(("customer_id", argument),)),
            ),
        )
        edits.append(TrimEdit(EditKind.ADDED_TERMINAL, closing.label, f"{terminal_tool} appended"))
        steps = steps + (closing,)

    return replace(w, steps=renumber(steps, edits)), edits
