"""
Reference executor for the fulfillment stage.

Walks a workflow deterministically: actions in order, then the first branch
whose condition holds. A branch body that runs out falls through to the step
after its parent; ``Go to step N`` jumps to a top-level step; the terminal
tool ends the session. Arguments resolve from the customer record, then the
client's replies, then earlier tool outputs.
"""

from dataclasses import dataclass
from typing import Any, Dict, Mapping, NamedTuple, Optional, Tuple

from libraries.datagen import ScriptedClient
from libraries.tools import ToolError, ToolSet
from libraries.workflow import (
    MISSING,
    TERMINAL_TOOL,
    Action,
    ActionKind,
    ArgExpr,
    ArgKind,
    Condition,
    ConditionKind,
    Step,
    Workflow,
    attribute_holds,
    lookup,
)

from .errors import ExecutorStuck
from .events import FULFILLMENT, EventKind
from .lanes import LaneRecorder, ToolRunner

DEFAULT_MAX_STEPS = 10_000


@dataclass
class FulfillmentContext:
    session_id: str
    workflow: Workflow
    toolset: ToolSet
    runner: ToolRunner
    recorder: LaneRecorder
    client: ScriptedClient
    record: Mapping[str, Any]
    agent: str = FULFILLMENT
    terminal_tool: str = TERMINAL_TOOL
    max_turns: int = 500


class _Jump(NamedTuple):
    target: str


_END = object()


def thaw(value: Any) -> Any:
    """Frozen literals back to plain JSON values."""
    if isinstance(value, tuple):
        return [thaw(v) for v in value]
    if isinstance(value, list):
        return [thaw(v) for v in value]
    if isinstance(value, Mapping):
        return {k: thaw(v) for k, v in value.items()}
    return value


class Executor:
    def __init__(self, ctx: FulfillmentContext, max_steps: int = DEFAULT_MAX_STEPS):
        self.ctx = ctx
        self.max_steps = max_steps
        self.replies: Dict[str, Any] = {}
        self.outputs: Dict[str, Dict[str, Any]] = {}
        self.outcomes: Dict[str, str] = {}
        self.positions = {step.label: i for i, step in enumerate(ctx.workflow.steps)}
        self.label = "0"
        self.executed = 0

    def run(self) -> None:
        """
        Execute the workflow until the case is closed.

        Raises:
            ExecutorStuck: Unresolvable argument, undeclared tool or a path
                that ends without the terminal tool
        """
        steps = self.ctx.workflow.steps
        if not steps:
            self.call(
                Action(
                    ActionKind.TERMINAL,
                    tool=self.ctx.terminal_tool,
                    args=(("customer_id", ArgExpr.attr("customer_id")),),
                )
            )
            self.close()
            return

        position = 0
        while position < len(steps):
            signal = self.exec_step(steps[position])
            if signal is _END:
                return
            if isinstance(signal, _Jump):
                if signal.target not in self.positions:
                    raise ExecutorStuck(self.label, f"no top-level step {signal.target}")
                position = self.positions[signal.target]
                continue
            position += 1
        raise ExecutorStuck(steps[-1].label, "workflow ended without closing the case")

    def exec_sequence(self, steps: Tuple[Step, ...]):
        for step in steps:
            signal = self.exec_step(step)
            if signal is not None:
                return signal
        return None

    def exec_step(self, step: Step):
        self.executed += 1
        if self.executed > self.max_steps:
            raise ExecutorStuck(step.label, f"more than {self.max_steps} steps executed")
        self.label = step.label

        for action in step.actions:
            if action.kind is ActionKind.SAY:
                self.ctx.recorder.say(self.ctx.agent, action.text or "")
            elif action.kind is ActionKind.PROMPT:
                self.ask(action.key, action.text or "")
            elif action.kind is ActionKind.GOTO:
                return _Jump(action.target)
            else:
                self.call(action)
                if action.kind is ActionKind.TERMINAL:
                    self.close()
                    return _END

        for branch in step.branches:
            if self.holds(branch.condition):
                return self.exec_sequence(branch.body)
        return None

    def ask(self, key: str, text: str) -> Any:
        self.ctx.recorder.say(self.ctx.agent, text)
        reply = self.ctx.client.respond(key)
        self.ctx.recorder.hear(reply.text)
        self.replies[key] = reply.value
        return reply.value

    def call(self, action: Action) -> None:
        args = {name: self.resolve(expr) for name, expr in action.args}
        try:
            outcome = self.ctx.runner.invoke(action.tool, args)
        except ToolError as e:
            raise ExecutorStuck(self.label, str(e)) from e
        self.ctx.recorder.act(
            EventKind.TOOL_INVOCATION,
            self.ctx.agent,
            tool=action.tool,
            params=args,
            outcome=outcome.outcome,
        )
        self.outcomes[action.tool] = outcome.outcome
        if not outcome.failed:
            self.outputs[action.tool] = outcome.payload

    def close(self) -> None:
        reply = self.ctx.client.finish()
        self.ctx.recorder.hear(reply.text)

    def holds(self, condition: Condition) -> bool:
        if condition.kind is ConditionKind.TOOL_OUTCOME:
            return self.outcomes.get(condition.subject) == condition.value
        if condition.kind is ConditionKind.USER_REPLY:
            if condition.subject not in self.replies:
                question = condition.subject.replace("_", " ")
                self.ask(condition.subject, f"Please answer yes or no: {question}?")
            return str(self.replies[condition.subject]).lower() == str(condition.value).lower()
        return attribute_holds(condition, lookup(self.ctx.record, condition.subject))

    def resolve(self, expr: ArgExpr) -> Any:
        if expr.kind is ArgKind.LITERAL:
            return thaw(expr.value)
        if expr.kind is ArgKind.OUTPUT:
            payload = self.outputs.get(expr.tool)
            value = MISSING if payload is None else lookup(payload, expr.path)
            if value is MISSING:
                raise ExecutorStuck(self.label, f"no output {expr.tool}.{expr.path}")
            return thaw(value)

        path = expr.path
        value = lookup(self.ctx.record, path)
        if value is not MISSING and value is not None:
            return thaw(value)
        key, _, rest = path.partition(".")
        if key in self.replies:
            found = lookup(self.replies[key], rest) if rest else self.replies[key]
            if found is not MISSING:
                return thaw(found)
        for payload in reversed(list(self.outputs.values())):
            found = lookup(payload, path)
            if found is not MISSING:
                return thaw(found)
        if value is None:
            return None
        raise ExecutorStuck(self.label, f"cannot resolve {path}")


def execute(ctx: FulfillmentContext, max_steps: Optional[int] = None) -> Executor:
    executor = Executor(ctx, max_steps or DEFAULT_MAX_STEPS)
    executor.run()
    return executor
