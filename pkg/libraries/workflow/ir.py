"""
Workflow intermediate representation.

A workflow is an ordered list of numbered steps. Each step carries prose, an
ordered list of actions and an ordered list of conditional branches whose
bodies are again steps. All values are frozen so validated workflows can be
shared between threads.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple

TERMINAL_TOOL = "complete_case"
INFO_SUFFIX = "_extra"


class ActionKind(Enum):
    TOOL_CALL = "ToolCall"
    PROMPT = "Prompt"
    SAY = "Say"
    TERMINAL = "Terminal"
    GOTO = "Goto"


class ConditionKind(Enum):
    ATTR_EQUALS = "AttrEquals"
    ATTR_NULL = "AttrNull"
    ATTR_COMPARE = "AttrCompare"
    ATTR_IN_SET = "AttrInSet"
    TOOL_OUTCOME = "ToolOutcome"
    USER_REPLY = "UserReply"


ATTRIBUTE_KINDS = frozenset(
    {
        ConditionKind.ATTR_EQUALS,
        ConditionKind.ATTR_NULL,
        ConditionKind.ATTR_COMPARE,
        ConditionKind.ATTR_IN_SET,
    }
)
RUNTIME_KINDS = frozenset({ConditionKind.TOOL_OUTCOME, ConditionKind.USER_REPLY})

COMPARE_OPS = ("==", "!=", "<=", ">=", "<", ">")
NEGATED_OPS = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", "<=": ">", ">": "<="}


def render_literal(value: Any) -> str:
    """Render a literal as JSON (tuples become lists)."""
    if isinstance(value, tuple):
        value = list(value)
    return json.dumps(value, ensure_ascii=False)


def label_key(label: str) -> Tuple[int, ...]:
    """Sort key of a dotted step label."""
    return tuple(int(part) for part in label.split("."))


class ArgKind(Enum):
    LITERAL = "Literal"
    ATTR = "AttrRef"
    OUTPUT = "OutputRef"


@dataclass(frozen=True)
class ArgExpr:
    """Argument expression: literal, attribute reference or tool-output reference."""

    kind: ArgKind
    value: Any = None
    path: str = ""
    tool: str = ""

    @classmethod
    def literal(cls, value: Any) -> "ArgExpr":
        return cls(ArgKind.LITERAL, value=value)

    @classmethod
    def attr(cls, path: str) -> "ArgExpr":
        return cls(ArgKind.ATTR, path=path)

    @classmethod
    def output(cls, tool: str, path: str) -> "ArgExpr":
        return cls(ArgKind.OUTPUT, path=path, tool=tool)

    def render(self) -> str:
        if self.kind is ArgKind.LITERAL:
            return render_literal(self.value)
        if self.kind is ArgKind.OUTPUT:
            return f"${self.tool}.{self.path}"
        return self.path


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    tool: Optional[str] = None
    args: Tuple[Tuple[str, ArgExpr], ...] = ()
    text: Optional[str] = None
    target: Optional[str] = None
    key: Optional[str] = None

    @property
    def arg_map(self) -> Dict[str, ArgExpr]:
        return dict(self.args)

    @property
    def calls_tool(self) -> bool:
        return self.kind in (ActionKind.TOOL_CALL, ActionKind.TERMINAL)

    @property
    def ends_step(self) -> bool:
        return self.kind in (ActionKind.TERMINAL, ActionKind.GOTO)

    def render(self) -> str:
        if self.calls_tool:
            rendered = []
            for name, expr in self.args:
                if expr.kind is ArgKind.ATTR and expr.path == name:
                    rendered.append(name)
                else:
                    rendered.append(f"{name}={expr.render()}")
            return f"Call `{self.tool}({', '.join(rendered)})`"
        if self.kind is ActionKind.SAY:
            return f"Say {render_literal(self.text or '')}"
        if self.kind is ActionKind.PROMPT:
            return f"Ask [{self.key}] {render_literal(self.text or '')}"
        return f"Go to step {self.target}"


@dataclass(frozen=True)
class Condition:
    kind: ConditionKind
    subject: str
    value: Any = None
    op: str = "=="

    @property
    def is_runtime(self) -> bool:
        return self.kind in RUNTIME_KINDS

    def render(self) -> str:
        if self.kind is ConditionKind.USER_REPLY:
            return f"reply {self.subject} is {self.value}"
        if self.kind is ConditionKind.TOOL_OUTCOME:
            return f"{self.subject} returns {render_literal(self.value)}"
        if self.kind is ConditionKind.ATTR_NULL:
            return f"{self.subject} is null" if self.value else f"{self.subject} is not null"
        if self.kind is ConditionKind.ATTR_IN_SET:
            return f"{self.subject} in {render_literal(self.value)}"
        return f"{self.subject} {self.op} {render_literal(self.value)}"

    def complements(self, other: "Condition") -> bool:
        """True when exactly one of the two conditions holds for any subject value."""
        if self.subject != other.subject:
            return False
        kinds = {self.kind, other.kind}
        if kinds == {ConditionKind.USER_REPLY}:
            return self.value != other.value
        if kinds == {ConditionKind.ATTR_NULL}:
            return self.value != other.value
        if kinds <= {ConditionKind.ATTR_EQUALS, ConditionKind.ATTR_COMPARE}:
            return self.value == other.value and NEGATED_OPS[self.op] == other.op
        return False


@dataclass(frozen=True)
class Step:
    label: str
    prose: str = ""
    actions: Tuple[Action, ...] = ()
    branches: Tuple["Branch", ...] = ()
    must_always: bool = False

    @property
    def key(self) -> Tuple[int, ...]:
        return label_key(self.label)

    @property
    def ends_unconditionally(self) -> bool:
        return bool(self.actions) and self.actions[-1].ends_step

    @property
    def terminates(self) -> bool:
        return bool(self.actions) and self.actions[-1].kind is ActionKind.TERMINAL

    @property
    def goto_target(self) -> Optional[str]:
        if self.actions and self.actions[-1].kind is ActionKind.GOTO:
            return self.actions[-1].target
        return None


@dataclass(frozen=True)
class Branch:
    condition: Condition
    body: Tuple[Step, ...]


@dataclass(frozen=True)
class Workflow:
    id: str
    domain: str
    intent: str
    steps: Tuple[Step, ...] = field(default_factory=tuple)

    def iter_steps(self) -> Iterator[Tuple[Step, int]]:
        """Yield every step with its branch depth, in document order."""
        yield from iter_steps(self.steps)

    def find(self, label: str) -> Optional[Step]:
        for step, _ in self.iter_steps():
            if step.label == label:
                return step
        return None

    def tool_calls(self) -> List[Action]:
        return [a for step, _ in self.iter_steps() for a in step.actions if a.calls_tool]

    def tool_names(self) -> frozenset:
        return frozenset(a.tool for a in self.tool_calls())

    @property
    def step_count(self) -> int:
        return sum(1 for _ in self.iter_steps())


@dataclass(frozen=True)
class PathSet:
    paths: Tuple[Tuple[str, ...], ...]
    truncated: bool = False

    @property
    def count(self) -> int:
        return len(self.paths)


def iter_steps(steps: Tuple[Step, ...], depth: int = 0) -> Iterator[Tuple[Step, int]]:
    for step in steps:
        yield step, depth
        for branch in step.branches:
            yield from iter_steps(branch.body, depth + 1)


def body_is_transparent(steps: Tuple[Step, ...]) -> bool:
    """True when the steps call no tools and never jump or terminate."""
    for step, _ in iter_steps(steps):
        if any(a.calls_tool or a.ends_step for a in step.actions):
            return False
    return True


def branches_closed(branches: Tuple[Branch, ...]) -> bool:
    """True when some pair of branch conditions is exhaustive."""
    conditions = [b.condition for b in branches]
    for i, left in enumerate(conditions):
        for right in conditions[i + 1:]:
            if left.complements(right):
                return True
    return False
