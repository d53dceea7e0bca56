"""
Brute-force reference for the pruning pass.

The reference never runs the pruner. It enumerates every true/false
selection of the decidable branches, keeps the one consistent with the
client's values, and walks the original workflow under that selection. The
result is the set of call paths a correct trim must reproduce, each call
with its arguments resolved against the client record.
"""

import json
import operator
from itertools import product
from typing import Any, Dict, FrozenSet, List, NamedTuple, Optional, Set, Tuple

from libraries.workflow import (
    DEFAULT_PATH_CAP,
    INFO_SUFFIX,
    MISSING,
    Action,
    ActionKind,
    ArgExpr,
    ArgKind,
    Condition,
    ConditionKind,
    Step,
    Workflow,
)
from libraries.workflow.ir import branches_closed

from .client_data import ClientData
from .errors import MissingAttribute

DEFAULT_MAX_DECISIONS = 16

BranchKey = Tuple[str, int]
Call = Tuple[str, Tuple[Tuple[str, str], ...]]
CallPath = Tuple[Call, ...]

_COMPARE = {
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


class OracleTrim(NamedTuple):
    decisions: Dict[BranchKey, bool]
    paths: FrozenSet[CallPath]
    steps: Tuple[Step, ...]

    @property
    def tools(self) -> FrozenSet[str]:
        return frozenset(tool for path in self.paths for tool, _ in path)


def satisfied(condition: Condition, value: Any) -> bool:
    """Truth of an attribute condition for a known, non-null value."""
    if condition.kind is ConditionKind.ATTR_NULL:
        return not condition.value
    if condition.kind is ConditionKind.ATTR_IN_SET:
        options, op = tuple(condition.value), "=="
    else:
        options, op = (condition.value,), condition.op
    for option in options:
        if isinstance(value, bool) is not isinstance(option, bool):
            if op == "!=":
                return True
            continue
        try:
            if _COMPARE[op](value, option):
                return True
        except TypeError:
            continue
    return False


def decidable_branches(w: Workflow, c: ClientData) -> List[Tuple[BranchKey, bool]]:
    """Every attribute branch whose subject the client knows, with its truth."""
    found = []
    for step, _ in w.iter_steps():
        for index, branch in enumerate(step.branches):
            condition = branch.condition
            if condition.is_runtime:
                continue
            value = c.value(condition.subject)
            if value is MISSING:
                raise MissingAttribute(condition.subject)
            if value is None:
                continue
            found.append(((step.label, index), satisfied(condition, value)))
    return found


def _argument(expr: ArgExpr, c: ClientData) -> str:
    if expr.kind is ArgKind.ATTR:
        value = c.value(expr.path)
        if value is MISSING or value is None:
            return expr.path
        return json.dumps(value, sort_keys=True)
    if expr.kind is ArgKind.LITERAL:
        return json.dumps(expr.value, sort_keys=True)
    return expr.render()


def _call(action: Action, c: ClientData) -> Call:
    return action.tool, tuple((name, _argument(expr, c)) for name, expr in action.args)


class _Walk:
    """Every run through a workflow, with decided branches fixed and the rest open."""

    def __init__(self, w: Workflow, c: ClientData, decisions: Dict[BranchKey, bool], cap: int):
        self.w = w
        self.c = c
        self.decisions = decisions
        self.cap = cap
        self.top_index = {step.label: i for i, step in enumerate(w.steps)}
        self.visited: Dict[str, Step] = {}

    def alternatives(self, step: Step, frames) -> List[tuple]:
        found = []
        open_branches = []
        for index, branch in enumerate(step.branches):
            decided = self.decisions.get((step.label, index))
            if decided is False:
                continue
            found.append(frames + ((branch.body, 0),))
            if decided is True:
                return found
            open_branches.append(branch)
        if not branches_closed(tuple(open_branches)):
            found.append(frames)
        return found

    def run(self) -> FrozenSet[CallPath]:
        paths: Set[CallPath] = set()
        stack = [(((self.w.steps, 0),), ())]
        while stack:
            frames, acc = stack.pop()
            while frames:
                steps, index = frames[-1]
                if index >= len(steps):
                    frames = frames[:-1]
                    continue
                step = steps[index]
                frames = frames[:-1] + ((steps, index + 1),)
                self.visited.setdefault(step.label, step)
                for action in step.actions:
                    if action.calls_tool and not action.tool.endswith(INFO_SUFFIX):
                        acc = acc + (_call(action, self.c),)
                    if action.kind is ActionKind.TERMINAL:
                        frames = ()
                        break
                    if action.kind is ActionKind.GOTO:
                        frames = ((self.w.steps, self.top_index[action.target]),)
                        break
                if not frames or step.ends_unconditionally or not step.branches:
                    continue
                choices = self.alternatives(step, frames)
                for choice in choices[1:]:
                    stack.append((choice, acc))
                frames = choices[0]
            paths.add(acc)
            if len(paths) > self.cap:
                raise ValueError(f"{self.w.id}: more than {self.cap} call paths")
        return frozenset(paths)


def call_paths(
    w: Workflow,
    c: ClientData,
    decisions: Optional[Dict[BranchKey, bool]] = None,
    cap: int = DEFAULT_PATH_CAP,
) -> FrozenSet[CallPath]:
    """
    Distinct exec-call sequences of a workflow, arguments resolved against ``c``.

    Branches listed in ``decisions`` are fixed; every other branch may or may
    not be taken, and an open branch set may also be passed over.
    """
    return _Walk(w, c, decisions or {}, cap).run()


def reference(w: Workflow, c: ClientData, decisions: Optional[Dict[BranchKey, bool]] = None) -> OracleTrim:
    """Walk ``w`` under the client's own branch truths (or the given ones)."""
    if decisions is None:
        decisions = dict(decidable_branches(w, c))
    walk = _Walk(w, c, decisions, DEFAULT_PATH_CAP)
    paths = walk.run()
    return OracleTrim(decisions, paths, tuple(walk.visited.values()))


def oracle_trim(w: Workflow, c: ClientData, max_decisions: int = DEFAULT_MAX_DECISIONS) -> OracleTrim:
    """
    Reference trim by enumerating every true/false selection of the decidable branches.

    Exactly one selection agrees with the client's values; the original
    workflow walked under it gives the call paths ``trim`` has to keep.

    Raises:
        ValueError: More decidable branches than ``max_decisions``
    """
    decidable = decidable_branches(w, c)
    if len(decidable) > max_decisions:
        raise ValueError(
            f"{w.id}: {len(decidable)} decidable branches exceed the oracle limit {max_decisions}"
        )
    keys = [key for key, _ in decidable]
    truths = [truth for _, truth in decidable]

    consistent = [
        selection
        for selection in product((True, False), repeat=len(keys))
        if all(chosen == truth for chosen, truth in zip(selection, truths))
    ]
    if len(consistent) != 1:
        raise AssertionError(f"{w.id}: {len(consistent)} consistent selections")
    return reference(w, c, dict(zip(keys, consistent[0])))


__all__ = ["OracleTrim", "call_paths", "decidable_branches", "oracle_trim", "reference", "satisfied"]
