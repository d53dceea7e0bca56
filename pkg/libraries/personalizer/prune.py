"""
Pruning pass.

Replaces info-tool calls with what they returned, inlines known argument
values and keeps only the branches the client's attributes can still take.
Branches follow first-match semantics: a statically true branch shadows every
branch after it, and when nothing undecided precedes it its body is spliced
in place of the branch. Steps that can no longer be reached are dropped.
"""

import json
from dataclasses import replace
from typing import Any, Callable, List, Optional, Set, Tuple

from robot.api import logger

from libraries.workflow import (
    INFO_SUFFIX,
    MISSING,
    Action,
    ActionKind,
    ArgExpr,
    ArgKind,
    Branch,
    Condition,
    Decision,
    Step,
    Workflow,
    decide,
    iter_steps,
    step_terminates,
)

from .client_data import ClientData
from .errors import MissingAttribute
from .result import EditKind, TrimEdit

Decider = Callable[[Step, int, Condition], Decision]

_SCALARS = (str, int, float, bool)


def known_note(payload: Any) -> str:
    """Compact single-token note recording an info tool's result in prose."""
    return "known:" + json.dumps(payload, sort_keys=True, separators=(",", ":"))


def inlinable(value: Any) -> bool:
    if isinstance(value, _SCALARS):
        return True
    return isinstance(value, (list, tuple)) and all(isinstance(v, _SCALARS) for v in value)


def goto_targets(steps) -> Set[str]:
    return {
        action.target
        for step, _ in iter_steps(tuple(steps))
        for action in step.actions
        if action.kind is ActionKind.GOTO
    }


class Pruner:
    """
    One pruning traversal over a workflow for one client.

    ``visits`` counts the steps the traversal touched; statically false
    branches are never entered, so it stays within the workflow's step count.
    """

    def __init__(self, client: ClientData, decider: Optional[Decider] = None):
        self.client = client
        self.decider = decider or self.decide
        self.edits: List[TrimEdit] = []
        self.visits = 0

    def edit(self, kind: EditKind, at: str, detail: str) -> None:
        self.edits.append(TrimEdit(kind, at, detail))

    def decide(self, step: Step, index: int, condition: Condition) -> Decision:
        if condition.is_runtime:
            return Decision.UNKNOWN
        value = self.client.value(condition.subject)
        if value is MISSING:
            raise MissingAttribute(condition.subject)
        return decide(condition, value)

    def run(self, w: Workflow) -> Workflow:
        steps = self.prune_sequence(w.steps, nested=False)
        return replace(w, steps=tuple(self.drop_unreachable(steps)))

    def prune_sequence(self, steps: Tuple[Step, ...], nested: bool) -> List[Step]:
        pruned: List[Step] = []
        for step in steps:
            pruned.extend(self.prune_step(step))
        return self.cut_after_end(pruned) if nested else pruned

    def prune_step(self, step: Step) -> List[Step]:
        self.visits += 1
        prose, actions = self.resolve_actions(step)

        kept: List[Branch] = []
        spliced: Tuple[Step, ...] = ()
        taken: Optional[Condition] = None
        for index, branch in enumerate(step.branches):
            condition = branch.condition
            if taken is not None:
                self.note_shadowed(step, index, condition, taken)
                continue
            decision = self.decider(step, index, condition)
            if decision is Decision.FALSE:
                self.edit(EditKind.PRUNED_BRANCH, step.label, f"{condition.render()} is false")
                continue
            body = tuple(self.prune_sequence(branch.body, nested=True))
            if decision is Decision.TRUE:
                taken = condition
                if not kept:
                    spliced = body
                    self.edit(
                        EditKind.PRUNED_BRANCH, step.label, f"{condition.render()} holds, body inlined"
                    )
                    continue
            kept.append(Branch(condition, body))

        resolved = replace(step, prose=prose, actions=actions, branches=tuple(kept))
        return [resolved, *spliced]

    def note_shadowed(self, step: Step, index: int, condition: Condition, taken: Condition):
        detail = f"{condition.render()} follows taken branch {taken.render()}"
        if not condition.is_runtime:
            try:
                also = self.decider(step, index, condition) is Decision.TRUE
            except MissingAttribute:
                also = False
            if also:
                detail += " (also holds, first match wins)"
                logger.warn(f"Step {step.label}: {condition.render()} also holds; first match wins")
        self.edit(EditKind.PRUNED_BRANCH, step.label, detail)

    def resolve_actions(self, step: Step) -> Tuple[str, Tuple[Action, ...]]:
        notes = []
        actions = []
        for action in step.actions:
            if action.calls_tool and action.tool.endswith(INFO_SUFFIX):
                if action.tool not in self.client.info_results:
                    raise MissingAttribute(action.tool)
                note = known_note(self.client.info_results[action.tool])
                notes.append(note)
                self.edit(EditKind.INLINED_VALUE, step.label, f"{action.tool} -> {note}")
                continue
            if action.calls_tool:
                action = self.inline_args(step.label, action)
            actions.append(action)
        prose = " ".join([step.prose, *notes]).strip() if notes else step.prose
        return prose, tuple(actions)

    def inline_args(self, label: str, action: Action) -> Action:
        args = []
        for name, expr in action.args:
            if expr.kind is ArgKind.ATTR:
                value = self.client.value(expr.path)
                if value is not MISSING and value is not None and inlinable(value):
                    if isinstance(value, list):
                        value = tuple(value)
                    expr = ArgExpr.literal(value)
                    self.edit(EditKind.INLINED_VALUE, label, f"{action.tool}.{name} = {expr.render()}")
            args.append((name, expr))
        return replace(action, args=tuple(args))

    def cut_after_end(self, steps: List[Step]) -> List[Step]:
        for position, step in enumerate(steps):
            if step_terminates(step) and position < len(steps) - 1:
                dropped = ", ".join(s.label for s in steps[position + 1:])
                self.edit(EditKind.TERMINATED_EARLY, step.label, f"dropped {dropped}")
                return steps[: position + 1]
        return steps

    def drop_unreachable(self, steps: List[Step]) -> List[Step]:
        reachable: List[Step] = []
        targets: Set[str] = set()
        falls = True
        for step in steps:
            if falls or step.label in targets:
                reachable.append(step)
                targets |= goto_targets((step,))
                falls = not step_terminates(step)
                continue
            self.edit(EditKind.REMOVED_UNREACHABLE, step.label, "no path reaches this step")
        return reachable


def pass1_prune(
    w: Workflow, c: ClientData, decider: Optional[Decider] = None
) -> Tuple[Workflow, List[TrimEdit]]:
    """
    Prune a workflow against a client record.

    Args:
        w: Validated workflow
        c: Client record covering every info tool the workflow calls
        decider: Optional replacement for the static branch decision

    Returns:
        (pruned workflow, edits)

    Raises:
        MissingAttribute: A decidable condition reads an absent, non-nullable attribute
    """
    pruner = Pruner(c, decider)
    pruned = pruner.run(w)
    return pruned, pruner.edits
