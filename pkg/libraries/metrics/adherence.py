"""
Adherence metrics between a predicted and a ground-truth trajectory.

Every metric accepts Trajectory objects; the sequence metrics also accept
plain lists of tool names (and ``param_match`` a list of (tool, params)
pairs), which keeps hand-written cases short. Percentages are returned at
full precision; rounding happens when a report is written.
"""

from collections import Counter
from typing import Any, Dict, Hashable, List, Mapping, NamedTuple, Sequence, Tuple, Union

import numpy as np

from libraries.orchestration import Trajectory
from libraries.workflow import flatten

ToolSeq = Union[Trajectory, Sequence[str]]
CallSeq = Union[Trajectory, Sequence[Tuple[str, Mapping[str, Any]]]]


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float


def _tools(value: ToolSeq, scope: str = "overall") -> List[str]:
    if isinstance(value, Trajectory):
        return value.tool_names(scope)
    return list(value)


def _calls(value: CallSeq) -> List[Tuple[str, Mapping[str, Any]]]:
    if isinstance(value, Trajectory):
        return [(e.tool, e.params or {}) for e in value.tool_events()]
    return [(tool, params) for tool, params in value]


def lcs_length(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Length of the longest common subsequence, duplicates matched by position."""
    if not a or not b:
        return 0
    table = np.zeros((len(a) + 1, len(b) + 1), dtype=np.int64)
    for i, x in enumerate(a, start=1):
        for j, y in enumerate(b, start=1):
            if x == y:
                table[i, j] = table[i - 1, j - 1] + 1
            else:
                table[i, j] = max(table[i - 1, j], table[i, j - 1])
    return int(table[-1, -1])


def _coverage(found: int, total: int, pred_empty: bool) -> float:
    if total == 0:
        return 100.0 if pred_empty else 0.0
    return found / total * 100.0


def exact_match(pred: Trajectory, gt: Trajectory) -> int:
    """1 iff agent transitions and tool names agree in order; parameters are ignored."""
    return int(pred.signature() == gt.signature())


def agent_match(pred: Trajectory, gt: Trajectory) -> Tuple[float, float]:
    """(ordered, any order) percentage of ground-truth transitions recovered."""
    predicted, expected = pred.transitions(), gt.transitions()
    ordered = _coverage(lcs_length(predicted, expected), len(expected), not predicted)
    overlap = sum((Counter(predicted) & Counter(expected)).values())
    return ordered, _coverage(overlap, len(expected), not predicted)


def lcs_tools(pred: ToolSeq, gt: ToolSeq) -> float:
    """
    Share of ground-truth tool calls covered by the LCS of tool names.

    Example:
        lcs_tools(["a", "b", "c"], ["a", "c"]) == 100.0
    """
    predicted, expected = _tools(pred), _tools(gt)
    return _coverage(lcs_length(predicted, expected), len(expected), not predicted)


def prf(predicted: Sequence[str], expected: Sequence[str]) -> PRF:
    """
    Multiset precision, recall and F1 over tool names.

    An empty side scores 0 for the ratio it cannot support, except that two
    empty sides agree perfectly.
    """
    if not predicted and not expected:
        return PRF(100.0, 100.0, 100.0)
    hits = sum((Counter(predicted) & Counter(expected)).values())
    precision = hits / len(predicted) * 100.0 if predicted else 0.0
    recall = hits / len(expected) * 100.0 if expected else 100.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PRF(precision, recall, f1)


def tool_prf(pred: ToolSeq, gt: ToolSeq, scope: str = "overall") -> PRF:
    return prf(_tools(pred, scope), _tools(gt, scope))


def param_match(pred: CallSeq, gt: CallSeq) -> float:
    """
    Percentage of ground-truth (key, value) parameter pairs reproduced.

    Calls are aligned greedily: each ground-truth call takes the first unused
    predicted call of the same tool. Nested values compare as dotted keys;
    extra predicted keys earn nothing.
    """
    predicted, expected = _calls(pred), _calls(gt)
    used = [False] * len(predicted)
    matched = total = 0
    for tool, params in expected:
        wanted = flatten(params)
        total += len(wanted)
        for i, (candidate, given) in enumerate(predicted):
            if used[i] or candidate != tool:
                continue
            used[i] = True
            given = flatten(given)
            matched += sum(1 for key, value in wanted.items() if key in given and given[key] == value)
            break
    if total == 0:
        return 100.0
    return matched / total * 100.0


class RunScores(NamedTuple):
    exact_match: int
    agent_match_ordered: float
    agent_match_any: float
    lcs_tools: float
    tool: PRF
    fulfillment_tool: PRF
    param_match: float


def score(pred: Trajectory, gt: Trajectory) -> RunScores:
    """All adherence metrics of one predicted run against its ground truth."""
    ordered, any_order = agent_match(pred, gt)
    return RunScores(
        exact_match=exact_match(pred, gt),
        agent_match_ordered=ordered,
        agent_match_any=any_order,
        lcs_tools=lcs_tools(pred, gt),
        tool=tool_prf(pred, gt, "overall"),
        fulfillment_tool=tool_prf(pred, gt, "fulfillment"),
        param_match=param_match(pred, gt),
    )


def scores_to_dict(scores: RunScores) -> Dict[str, float]:
    return {
        "exact_match": scores.exact_match,
        "agent_match_ordered": scores.agent_match_ordered,
        "agent_match_any": scores.agent_match_any,
        "lcs_tools": scores.lcs_tools,
        "tool_precision": scores.tool.precision,
        "tool_recall": scores.tool.recall,
        "tool_f1": scores.tool.f1,
        "fulfillment_tool_precision": scores.fulfillment_tool.precision,
        "fulfillment_tool_recall": scores.fulfillment_tool.recall,
        "fulfillment_tool_f1": scores.fulfillment_tool.f1,
        "param_match": scores.param_match,
    }
