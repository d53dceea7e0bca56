"""
Lanes: concurrent parts of a session.

Authentication and personalization run as two lanes. Each lane owns a forked
clock, its own event buffer and its own tool runner, and hands its result
over through a single-assignment slot. Nothing mutable is shared between
lanes; the barrier reads both slots and merges the buffers by
(time, lane, sequence).
"""

import threading
from collections import Counter
from dataclasses import replace
from typing import Any, Callable, Dict, Generic, Iterable, List, Mapping, Optional, TypeVar

from robot.api import logger

from libraries.tools import ToolOutcome, ToolSet, derive_seed, invoke

from .accounting import TokenLedger, tool_call_text
from .errors import BarrierViolation
from .events import CLIENT, CONVERSATIONAL, AgentEvent, EventKind

T = TypeVar("T")

LANE_ORDER = {"main": 0, "auth": 1, "personalizer": 2}
_CHARGED = (EventKind.UTTERANCE, EventKind.TOOL_INVOCATION, EventKind.THOUGHT)


class Slot(Generic[T]):
    """Write-once result cell read at the barrier."""

    def __init__(self, name: str):
        self.name = name
        self._ready = threading.Event()
        self._lock = threading.Lock()
        self._value: Optional[T] = None
        self._error: Optional[BaseException] = None

    @property
    def filled(self) -> bool:
        return self._ready.is_set()

    def _assign(self, value: Optional[T], error: Optional[BaseException]) -> None:
        with self._lock:
            if self._ready.is_set():
                raise BarrierViolation(f"Slot {self.name} assigned twice")
            self._value = value
            self._error = error
            self._ready.set()

    def set(self, value: T) -> None:
        self._assign(value, None)

    def fail(self, error: BaseException) -> None:
        self._assign(None, error)

    def get(self, timeout: Optional[float] = None) -> T:
        if not self._ready.wait(timeout):
            raise BarrierViolation(f"Slot {self.name} was never filled")
        if self._error is not None:
            raise self._error
        return self._value


class ToolRunner:
    """Invokes tools for one lane, seeding each call by (session seed, tool, occurrence)."""

    def __init__(self, toolset: ToolSet, record: Mapping[str, Any], seed: int, clock):
        self.toolset = toolset
        self.record = record
        self.seed = seed
        self.clock = clock
        self.counts: Counter = Counter()

    def invoke(self, tool: str, args: Mapping[str, Any]) -> ToolOutcome:
        occurrence = self.counts[tool]
        self.counts[tool] += 1
        outcome = invoke(self.toolset, tool, args, self.record, derive_seed(self.seed, tool, occurrence))
        self.clock.advance(outcome.elapsed)
        return outcome


class LaneRecorder:
    """
    Buffers the events of one lane, stamping them with the lane clock.

    Conversational agent turns are charged against the token ledger and,
    when ``think`` is on, preceded by a hidden thought.
    """

    def __init__(
        self,
        lane: str,
        clock,
        stage: str,
        ledger: Optional[TokenLedger] = None,
        contexts: Optional[Dict[str, int]] = None,
        turn_latency: int = 0,
        think: bool = False,
        trace: bool = True,
    ):
        self.lane = lane
        self.clock = clock
        self.stage = stage
        self.ledger = ledger
        self.contexts = contexts if contexts is not None else {}
        self.turn_latency = turn_latency
        self.think = think
        self.trace = trace
        self.events: List[AgentEvent] = []

    def emit(self, kind: EventKind, agent: str, role: str = "agent", **fields) -> AgentEvent:
        tokens_in = tokens_out = 0
        if self.ledger is not None and kind in _CHARGED:
            text = fields.get("text")
            if kind is EventKind.TOOL_INVOCATION:
                text = tool_call_text(fields["tool"], fields["params"])
            if role == "client":
                self.ledger.hear(text)
            elif agent in CONVERSATIONAL:
                if self.turn_latency:
                    self.clock.advance(self.turn_latency)
                tokens_in, tokens_out = self.ledger.charge(self.contexts.get(agent, 0), text)
        event = AgentEvent(
            kind=kind,
            agent=agent,
            role=role,
            stage=self.stage,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            at=self.clock.now(),
            seq=len(self.events),
            lane=self.lane,
            **fields,
        )
        self.events.append(event)
        if self.trace:
            logger.debug(f"[{self.lane}] {kind.value} {agent}: {fields.get('tool') or fields.get('text') or ''}")
        return event

    def act(self, kind: EventKind, agent: str, **fields) -> AgentEvent:
        """An agent action, preceded by its thought when thinking is on."""
        if self.think:
            if kind is EventKind.TOOL_INVOCATION:
                names = ", ".join(sorted(fields["params"])) or "no arguments"
                thought = f"Thought: the next step calls {fields['tool']} with {names}."
            else:
                thought = "Thought: the next step needs a message to the client."
            self.emit(EventKind.THOUGHT, agent, text=thought)
        return self.emit(kind, agent, **fields)

    def say(self, agent: str, text: str) -> AgentEvent:
        return self.act(EventKind.UTTERANCE, agent, text=text)

    def hear(self, text: str) -> AgentEvent:
        return self.emit(EventKind.UTTERANCE, CLIENT, role="client", text=text)


class Lane(Generic[T]):
    def __init__(self, recorder: LaneRecorder):
        self.recorder = recorder
        self.slot: Slot[T] = Slot(recorder.lane)
        self.thread: Optional[threading.Thread] = None

    @property
    def name(self) -> str:
        return self.recorder.lane

    @property
    def clock(self):
        return self.recorder.clock

    def _run(self, work: Callable[[LaneRecorder], T]) -> None:
        try:
            result = work(self.recorder)
        except BaseException as e:
            self.slot.fail(e)
            return
        self.slot.set(result)

    def start(self, work: Callable[[LaneRecorder], T]) -> "Lane[T]":
        self.thread = threading.Thread(target=self._run, args=(work,), name=f"{self.name}-lane", daemon=True)
        self.thread.start()
        return self

    def run_inline(self, work: Callable[[LaneRecorder], T]) -> "Lane[T]":
        self._run(work)
        return self

    def join(self, timeout: Optional[float] = None) -> T:
        if self.thread is not None:
            self.thread.join(timeout)
        return self.slot.get(timeout)


def merge_lanes(lanes: Iterable[Lane]) -> List[AgentEvent]:
    """Interleave lane buffers by (time, lane, sequence)."""
    events = [event for lane in lanes for event in lane.recorder.events]
    events.sort(key=lambda e: (e.at, LANE_ORDER.get(e.lane, len(LANE_ORDER)), e.seq))
    return [replace(event, seq=position) for position, event in enumerate(events)]
