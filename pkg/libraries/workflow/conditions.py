"""Evaluation of branch conditions, statically and at runtime."""

import operator
from enum import Enum
from typing import Any

from .ir import Condition, ConditionKind
from .paths import MISSING

_OPS = {
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


class Decision(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @classmethod
    def of(cls, value: bool) -> "Decision":
        return cls.TRUE if value else cls.FALSE


def _compare(op: str, left: Any, right: Any) -> bool:
    if isinstance(left, bool) != isinstance(right, bool):
        return op == "!="
    try:
        return bool(_OPS[op](left, right))
    except TypeError:
        return False


def attribute_holds(condition: Condition, value: Any) -> bool:
    """Runtime truth of an attribute condition; absent values behave as null."""
    if value is MISSING:
        value = None
    kind = condition.kind
    if kind is ConditionKind.ATTR_NULL:
        return (value is None) == bool(condition.value)
    if value is None:
        return kind is ConditionKind.ATTR_COMPARE and condition.op == "!="
    if kind is ConditionKind.ATTR_IN_SET:
        return any(_compare("==", value, option) for option in condition.value)
    return _compare(condition.op, value, condition.value)


def decide(condition: Condition, value: Any) -> Decision:
    """
    Static decision for a condition given a known attribute value.

    Runtime conditions and null attributes are never decided, so the whole
    branch set stays in place for the executor.
    """
    if condition.is_runtime or value is None or value is MISSING:
        return Decision.UNKNOWN
    return Decision.of(attribute_holds(condition, value))
