"""
Deterministic relevance/completeness rubric for trimmed workflows.

Relevance loses a point per surviving info call, statically false branch or
step placed after the case already closed. Completeness loses two points per
missing required tool and one per missing outcome branch, missing must-always
step or open ending. Both scores are clamped to 1..5.
"""

from collections import Counter
from typing import Iterable, List, NamedTuple

from libraries.workflow import (
    INFO_SUFFIX,
    MISSING,
    Step,
    Workflow,
    always_terminates,
    attribute_holds,
    step_terminates,
)

from .client_data import ClientData
from .fidelity import runtime_branch_counts
from .oracle import OracleTrim, reference
from .prune import goto_targets

MISSING_TOOL_PENALTY = 2


class Audit(NamedTuple):
    relevance: int
    completeness: int
    findings: List[str]


def _clamp(score: int) -> int:
    return max(1, min(5, score))


def _post_terminal(steps, targets, findings: List[str], top_level: bool) -> int:
    issues = 0
    closed = False
    for step in steps:
        if top_level and step.label in targets:
            closed = False
        elif closed:
            issues += 1
            findings.append(f"step {step.label}: content after the case is closed")
        if step_terminates(step):
            closed = True
        for branch in step.branches:
            issues += _post_terminal(branch.body, targets, findings, top_level=False)
    return issues


def relevance_issues(trimmed: Workflow, c: ClientData, findings: List[str]) -> int:
    issues = 0
    for step, _ in trimmed.iter_steps():
        for action in step.actions:
            if action.calls_tool and action.tool.endswith(INFO_SUFFIX):
                issues += 1
                findings.append(f"step {step.label}: info call {action.tool} survived")
        for branch in step.branches:
            condition = branch.condition
            if condition.is_runtime:
                continue
            value = c.value(condition.subject)
            if value is MISSING or value is None:
                continue
            if not attribute_holds(condition, value):
                issues += 1
                findings.append(f"step {step.label}: dead branch '{condition.render()}' kept")
    issues += _post_terminal(trimmed.steps, goto_targets(trimmed.steps), findings, top_level=True)
    return issues


def step_key(step: Step) -> str:
    """Name a step by its first exec call, else its first say/ask, else its prose."""
    for action in step.actions:
        if action.calls_tool and not action.tool.endswith(INFO_SUFFIX):
            return action.tool
    for action in step.actions:
        if not action.calls_tool:
            return action.render()
    return step.prose or f"step {step.label}"


def _must_always(steps: Iterable[Step]) -> Counter:
    return Counter(step_key(step) for step in steps if step.must_always)


def _runtime_branches(steps: Iterable[Step]) -> Counter:
    return Counter(
        branch.condition.render()
        for step in steps
        for branch in step.branches
        if branch.condition.is_runtime
    )


def completeness_penalty(trimmed: Workflow, expected: OracleTrim, findings: List[str]) -> int:
    penalty = 0
    for tool in sorted(expected.tools - trimmed.tool_names()):
        penalty += MISSING_TOOL_PENALTY
        findings.append(f"required tool {tool} is missing")

    lost_branches = _runtime_branches(expected.steps) - runtime_branch_counts(trimmed)
    for rendered, count in sorted(lost_branches.items()):
        penalty += count
        findings.append(f"outcome branch '{rendered}' is missing")

    kept = _must_always(step for step, _ in trimmed.iter_steps())
    lost_steps = _must_always(expected.steps) - kept
    for key, count in sorted(lost_steps.items()):
        penalty += count
        findings.append(f"must-always step '{key}' is missing")

    if not trimmed.steps or not always_terminates(trimmed):
        penalty += 1
        findings.append("workflow can end without closing the case")
    return penalty


def audit(trimmed: Workflow, original: Workflow, c: ClientData) -> Audit:
    """
    Score a trimmed workflow against a direct walk of ``original``.

    The walk fixes every branch the client's values decide and follows the
    rest, so the expected tools, outcome branches and must-always steps come
    from the original workflow and never from the trimming passes.

    Args:
        trimmed: Workflow under review
        original: Full workflow it was trimmed from
        c: Client record the trim was made for

    Returns:
        Audit(relevance, completeness, findings)
    """
    expected = reference(original, c)

    findings: List[str] = []
    relevance = _clamp(5 - relevance_issues(trimmed, c, findings))
    completeness = _clamp(5 - completeness_penalty(trimmed, expected, findings))
    return Audit(relevance, completeness, findings)


__all__ = ["Audit", "audit", "step_key"]
