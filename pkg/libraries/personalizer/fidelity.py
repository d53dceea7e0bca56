"""
Fidelity pass.

Compares a pruned workflow with its original, step by step label, and puts
back what pruning must never remove: runtime outcome branches of retained
steps and must-always steps on a reachable position.
"""

from collections import Counter
from dataclasses import replace
from typing import Dict, List, Optional, Tuple

from robot.api import logger

from libraries.workflow import (
    INFO_SUFFIX,
    MISSING,
    Branch,
    Decision,
    Step,
    Workflow,
    decide,
    step_terminates,
)

from .client_data import ClientData
from .errors import FidelityViolation
from .prune import goto_targets
from .result import EditKind, TrimEdit

Chain = Tuple[str, ...]


def _index(steps: Tuple[Step, ...], chain: Chain = ()) -> Dict[str, Tuple[Step, Chain]]:
    """Map each label to its step and the runtime conditions guarding it."""
    found: Dict[str, Tuple[Step, Chain]] = {}
    for step in steps:
        found[step.label] = (step, chain)
        for branch in step.branches:
            inner = chain + (branch.condition.render(),) if branch.condition.is_runtime else chain
            found.update(_index(branch.body, inner))
    return found


def _exec_calls(step: Step) -> List[str]:
    return [
        action.tool
        for action in step.actions
        if action.calls_tool and not action.tool.endswith(INFO_SUFFIX)
    ]


def required_runtime_branches(step: Step, client: Optional[ClientData] = None) -> List[Branch]:
    """
    Runtime branches of an original step that its pruned copy must keep.

    Without a client record an attribute branch may have shadowed what
    follows it, so only the branches ahead of the first one are required.
    """
    required = []
    for branch in step.branches:
        condition = branch.condition
        if condition.is_runtime:
            required.append(branch)
            continue
        if client is None:
            break
        value = client.value(condition.subject)
        decision = Decision.UNKNOWN if value is MISSING else decide(condition, value)
        if decision is Decision.TRUE:
            break
    return required


class _Restorer:
    def __init__(self, original: Workflow, client: Optional[ClientData]):
        self.original = original
        self.originals = _index(original.steps)
        self.client = client
        self.edits: List[TrimEdit] = []

    def restore_sequence(self, steps: Tuple[Step, ...], chain: Chain) -> Tuple[Step, ...]:
        return tuple(self.restore_step(step, chain) for step in steps)

    def restore_step(self, step: Step, chain: Chain) -> Step:
        source = self.originals.get(step.label)
        branches = step.branches
        if source is not None:
            original, original_chain = source
            if _exec_calls(step) != _exec_calls(original):
                raise FidelityViolation(step.label, "tool calls differ from the original step")
            if _exec_calls(step) and chain != original_chain:
                raise FidelityViolation(step.label, "call moved out of its runtime branch")
            branches = self.restore_branches(step, original)

        restored = []
        for branch in branches:
            inner = chain + (branch.condition.render(),) if branch.condition.is_runtime else chain
            restored.append(Branch(branch.condition, self.restore_sequence(branch.body, inner)))
        return replace(step, branches=tuple(restored))

    def restore_branches(self, step: Step, original: Step) -> Tuple[Branch, ...]:
        present = {branch.condition.render(): branch for branch in step.branches}
        missing = [
            branch
            for branch in required_runtime_branches(original, self.client)
            if branch.condition.render() not in present
        ]
        if not missing:
            return step.branches
        if step.ends_unconditionally:
            raise FidelityViolation(step.label)

        wanted = {branch.condition.render() for branch in missing}
        ordered = []
        for branch in original.branches:
            rendered = branch.condition.render()
            if rendered in present:
                ordered.append(present.pop(rendered))
            elif rendered in wanted:
                ordered.append(branch)
                self.edits.append(TrimEdit(EditKind.RESTORED_BRANCH, step.label, rendered))
                logger.debug(f"Restored branch '{rendered}' on step {step.label}")
        ordered.extend(present.values())
        return tuple(ordered)

    def restore_must_always(self, steps: Tuple[Step, ...]) -> Tuple[Step, ...]:
        labels = {step.label for step in steps}
        result = list(steps)
        for candidate in self.original.steps:
            if not candidate.must_always or candidate.label in labels:
                continue
            position = next(
                (i for i, step in enumerate(result) if step.key > candidate.key), len(result)
            )
            reachable = (
                position == 0
                or not step_terminates(result[position - 1])
                or candidate.label in goto_targets(result)
            )
            if not reachable:
                continue
            result.insert(position, candidate)
            self.edits.append(TrimEdit(EditKind.RESTORED_STEP, candidate.label, candidate.prose))
        return tuple(result)


def pass2_fidelity(
    w: Workflow, original: Workflow, client: Optional[ClientData] = None
) -> Tuple[Workflow, List[TrimEdit]]:
    """
    Restore runtime branches and must-always steps the pruned workflow lost.

    Args:
        w: Output of the pruning pass
        original: Workflow it was pruned from
        client: Record it was pruned against; lets shadowed branches be told
            apart from lost ones

    Returns:
        (workflow, edits)

    Raises:
        FidelityViolation: A retained step changed its calls or a required
            branch cannot be put back
    """
    restorer = _Restorer(original, client)
    steps = restorer.restore_sequence(w.steps, ())
    steps = restorer.restore_must_always(steps)
    return replace(w, steps=steps), restorer.edits


def runtime_branch_counts(w: Workflow) -> Counter:
    return Counter(
        branch.condition.render()
        for step, _ in w.iter_steps()
        for branch in step.branches
        if branch.condition.is_runtime
    )
