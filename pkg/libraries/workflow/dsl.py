"""
Line-oriented workflow DSL.

Canonical form::

    @workflow update_address domain=banking intent=updateAddress
    1. Retrieve the account type
      - Call `get_account_type_extra(customer_id)`
      * If client_level == "STANDARD":
        1.1. Call `apply_address_hold(customer_id)`
    2. Call `complete_case(customer_id)`

Step headings sit at four spaces per branch depth; actions and branch headers
sit two spaces deeper than their heading. Blank lines and ``#`` comments are
insignificant.
"""

import json
import re
from dataclasses import dataclass
from typing import Any, List, Optional, Tuple

from .errors import WorkflowSyntaxError
from .ir import (
    TERMINAL_TOOL,
    Action,
    ActionKind,
    ArgExpr,
    Branch,
    Condition,
    ConditionKind,
    Step,
    Workflow,
)

MAX_SOURCE_BYTES = 1024 * 1024

HEADER_RE = re.compile(r"^@workflow\s+(\S+)\s+domain=(\S+)\s+intent=(\S+)$")
HEADING_RE = re.compile(r"^(\d+(?:\.\d+)*)\.(?:\s+(.*))?$")
CALL_RE = re.compile(r"^Call `([A-Za-z_]\w*)\((.*)\)`$")
SAY_RE = re.compile(r'^Say (".*")$')
ASK_RE = re.compile(r'^Ask \[([A-Za-z_][\w.]*)\] (".*")$')
GOTO_RE = re.compile(r"^Go to step (\d+(?:\.\d+)*)$")
BRANCH_RE = re.compile(r"^\* If (.+):$")

PATH = r"[A-Za-z_]\w*(?:\.[A-Za-z_]\w*)*"
PATH_RE = re.compile(rf"^{PATH}$")
REPLY_RE = re.compile(rf"^reply ({PATH}) is (yes|no)$")
RETURNS_RE = re.compile(r'^([A-Za-z_]\w*) returns (".*")$')
NOT_NULL_RE = re.compile(rf"^({PATH}) is not null$")
NULL_RE = re.compile(rf"^({PATH}) is null$")
IN_SET_RE = re.compile(rf"^({PATH}) in (\[.*\])$")
COMPARE_RE = re.compile(rf"^({PATH}) (==|!=|<=|>=|<|>) (.+)$")
OUTPUT_RE = re.compile(r"^\$([A-Za-z_]\w*)\.(" + PATH + r")$")
NAMED_ARG_RE = re.compile(r"^([A-Za-z_]\w*)\s*=\s*(.+)$")


@dataclass
class _Line:
    number: int
    indent: int
    text: str


class _Parser:
    def __init__(self, lines: List[_Line], terminal_tool: str):
        self.lines = lines
        self.pos = 0
        self.terminal_tool = terminal_tool

    def peek(self) -> Optional[_Line]:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def next(self) -> _Line:
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def error(self, line: _Line, expected: str) -> WorkflowSyntaxError:
        return WorkflowSyntaxError(line.number, line.indent + 1, expected, line.text)

    def parse_steps(self, indent: int) -> Tuple[Step, ...]:
        steps = []
        while True:
            line = self.peek()
            if line is None or line.indent < indent:
                break
            if line.indent > indent:
                raise self.error(line, f"step heading at indent {indent}")
            steps.append(self.parse_step(indent))
        return tuple(steps)

    def parse_step(self, indent: int) -> Step:
        line = self.next()
        match = HEADING_RE.match(line.text)
        if not match:
            raise self.error(line, "step heading '<label>. <prose>'")
        label, rest = match.group(1), (match.group(2) or "").strip()

        must_always = False
        if rest.startswith("[always]"):
            must_always = True
            rest = rest[len("[always]"):].strip()

        actions: List[Action] = []
        prose = rest
        inline = self.try_action(rest, line) if rest else None
        if inline is not None:
            actions.append(inline)
            prose = ""

        branches: List[Branch] = []
        inner = indent + 2
        while True:
            child = self.peek()
            if child is None or child.indent < inner:
                break
            if child.indent > inner:
                raise self.error(child, f"action or branch at indent {inner}")
            if child.text.startswith("- "):
                if branches:
                    raise self.error(child, "branch header (actions precede branches)")
                self.next()
                action = self.try_action(child.text[2:].strip(), child)
                if action is None:
                    raise self.error(child, "action (Call, Say, Ask or Go to step)")
                actions.append(action)
            elif child.text.startswith("* "):
                self.next()
                branch_match = BRANCH_RE.match(child.text)
                if not branch_match:
                    raise self.error(child, "branch header '* If <condition>:'")
                condition = self.parse_condition(branch_match.group(1).strip(), child)
                body = self.parse_steps(indent + 4)
                if not body:
                    raise self.error(child, "non-empty branch body")
                branches.append(Branch(condition, body))
            else:
                raise self.error(child, "'- <action>' or '* If <condition>:'")

        return Step(
            label=label,
            prose=prose,
            actions=tuple(actions),
            branches=tuple(branches),
            must_always=must_always,
        )

    def try_action(self, text: str, line: _Line) -> Optional[Action]:
        match = CALL_RE.match(text)
        if match:
            tool = match.group(1)
            args = self.parse_args(match.group(2), line)
            kind = ActionKind.TERMINAL if tool == self.terminal_tool else ActionKind.TOOL_CALL
            return Action(kind, tool=tool, args=args)
        match = SAY_RE.match(text)
        if match:
            return Action(ActionKind.SAY, text=self.parse_string(match.group(1), line))
        match = ASK_RE.match(text)
        if match:
            return Action(
                ActionKind.PROMPT,
                key=match.group(1),
                text=self.parse_string(match.group(2), line),
            )
        match = GOTO_RE.match(text)
        if match:
            return Action(ActionKind.GOTO, target=match.group(1))
        return None

    def parse_string(self, source: str, line: _Line) -> str:
        value = self.parse_json(source, line, "JSON string")
        if not isinstance(value, str):
            raise self.error(line, "JSON string")
        return value

    def parse_json(self, source: str, line: _Line, expected: str) -> Any:
        try:
            return json.loads(source)
        except ValueError:
            raise self.error(line, expected) from None

    def parse_args(self, source: str, line: _Line) -> Tuple[Tuple[str, ArgExpr], ...]:
        args = []
        seen = set()
        for piece in split_top_level(source):
            piece = piece.strip()
            if not piece:
                raise self.error(line, "argument")
            if PATH_RE.match(piece) and "." not in piece:
                name, expr = piece, ArgExpr.attr(piece)
            else:
                match = NAMED_ARG_RE.match(piece)
                if not match:
                    raise self.error(line, "argument 'name' or 'name=expr'")
                name, expr = match.group(1), self.parse_arg_expr(match.group(2).strip(), line)
            if name in seen:
                raise self.error(line, f"unique argument name (duplicate {name!r})")
            seen.add(name)
            args.append((name, expr))
        return tuple(args)

    def parse_arg_expr(self, source: str, line: _Line) -> ArgExpr:
        match = OUTPUT_RE.match(source)
        if match:
            return ArgExpr.output(match.group(1), match.group(2))
        if source in ("true", "false", "null") or source[0] in '"-0123456789[':
            return ArgExpr.literal(freeze(self.parse_json(source, line, "JSON literal")))
        if PATH_RE.match(source):
            return ArgExpr.attr(source)
        raise self.error(line, "literal, attribute path or $tool.path")

    def parse_condition(self, source: str, line: _Line) -> Condition:
        match = REPLY_RE.match(source)
        if match:
            return Condition(ConditionKind.USER_REPLY, match.group(1), match.group(2))
        match = RETURNS_RE.match(source)
        if match:
            label = self.parse_string(match.group(2), line)
            return Condition(ConditionKind.TOOL_OUTCOME, match.group(1), label)
        match = NOT_NULL_RE.match(source)
        if match:
            return Condition(ConditionKind.ATTR_NULL, match.group(1), False)
        match = NULL_RE.match(source)
        if match:
            return Condition(ConditionKind.ATTR_NULL, match.group(1), True)
        match = IN_SET_RE.match(source)
        if match:
            values = self.parse_json(match.group(2), line, "JSON list")
            return Condition(ConditionKind.ATTR_IN_SET, match.group(1), freeze(values))
        match = COMPARE_RE.match(source)
        if match:
            subject, op, literal = match.groups()
            value = self.parse_json(literal, line, "JSON literal")
            if value is None or isinstance(value, (list, dict)):
                raise self.error(line, "scalar literal (use 'is null' for null checks)")
            kind = ConditionKind.ATTR_EQUALS if op == "==" else ConditionKind.ATTR_COMPARE
            return Condition(kind, subject, value, op)
        raise self.error(line, "condition")


def split_top_level(source: str) -> List[str]:
    """Split on commas outside of strings and brackets."""
    if not source.strip():
        return []
    pieces, depth, in_string, escaped = [], 0, False, False
    current = []
    for ch in source:
        if in_string:
            current.append(ch)
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch in "[{":
            depth += 1
        elif ch in "]}":
            depth -= 1
        elif ch == "," and depth == 0:
            pieces.append("".join(current))
            current = []
            continue
        current.append(ch)
    pieces.append("".join(current))
    return pieces


def freeze(value: Any) -> Any:
    """Convert JSON lists to tuples so IR values stay hashable."""
    if isinstance(value, list):
        return tuple(freeze(v) for v in value)
    if isinstance(value, dict):
        raise ValueError("object literals are not supported")
    return value


def _split_lines(text: str) -> List[_Line]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.rstrip()
        if not stripped.strip() or stripped.lstrip().startswith("#"):
            continue
        body = stripped.lstrip(" ")
        if body.startswith("\t"):
            raise WorkflowSyntaxError(number, 1, "spaces for indentation", raw)
        lines.append(_Line(number, len(stripped) - len(body), body))
    return lines


def parse_workflow(
    text: str,
    tool_names=None,
    max_depth: int = 8,
    terminal_tool: str = TERMINAL_TOOL,
) -> Workflow:
    """
    Parse DSL source into a validated Workflow.

    Args:
        text: DSL source
        tool_names: Optional collection of declared tool names to resolve against
        max_depth: Maximum branch nesting depth
        terminal_tool: Name of the case-closing tool

    Returns:
        Validated Workflow
    """
    from .analysis import validate_workflow

    if len(text.encode("utf-8")) > MAX_SOURCE_BYTES:
        raise WorkflowSyntaxError(1, 1, "source of at most 1 MiB")
    lines = _split_lines(text)
    if not lines:
        raise WorkflowSyntaxError(1, 1, "'@workflow <id> domain=<domain> intent=<intent>'")
    header = HEADER_RE.match(lines[0].text)
    if not header or lines[0].indent:
        raise WorkflowSyntaxError(
            lines[0].number, 1, "'@workflow <id> domain=<domain> intent=<intent>'", lines[0].text
        )

    try:
        parser = _Parser(lines[1:], terminal_tool)
        steps = parser.parse_steps(0)
    except ValueError as exc:
        line = parser.lines[max(parser.pos - 1, 0)]
        raise WorkflowSyntaxError(line.number, line.indent + 1, str(exc), line.text) from None

    workflow = Workflow(
        id=header.group(1), domain=header.group(2), intent=header.group(3), steps=steps
    )
    validate_workflow(workflow, tool_names=tool_names, max_depth=max_depth)
    return workflow


def serialize_workflow(w: Workflow, header: bool = True) -> str:
    """Render the canonical, byte-stable DSL form of a workflow."""
    lines = []
    if header:
        lines.append(f"@workflow {w.id} domain={w.domain} intent={w.intent}")
    for step in w.steps:
        _emit_step(step, 0, lines)
    return "\n".join(lines) + "\n"


def _emit_step(step: Step, depth: int, lines: List[str]) -> None:
    indent = " " * (4 * depth)
    parts = []
    if step.must_always:
        parts.append("[always]")
    actions = list(step.actions)
    if step.prose:
        parts.append(step.prose)
    elif actions:
        parts.append(actions.pop(0).render())
    heading = f"{indent}{step.label}."
    if parts:
        heading += " " + " ".join(parts)
    lines.append(heading)
    for action in actions:
        lines.append(f"{indent}  - {action.render()}")
    for branch in step.branches:
        lines.append(f"{indent}  * If {branch.condition.render()}:")
        for child in branch.body:
            _emit_step(child, depth + 1, lines)


def looks_like_action(prose: str) -> bool:
    """True when prose would be read back as an inline action."""
    return bool(
        CALL_RE.match(prose) or SAY_RE.match(prose) or ASK_RE.match(prose) or GOTO_RE.match(prose)
    )


__all__ = ["parse_workflow", "serialize_workflow", "looks_like_action"]
