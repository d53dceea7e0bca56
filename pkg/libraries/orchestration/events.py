"""
Session events and trajectories.

A trajectory is the append-only event log of one session. It serializes to
JSONL: a header line with the session metadata followed by one line per
event, keys sorted, so equal sessions produce byte-identical files.
"""

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

ORCHESTRATOR = "Orchestrator"
AUTHENTICATOR = "Authenticator"
PERSONALIZER = "Personalizer"
FULFILLMENT = "Fulfillment"
REACT = "React"
CLIENT = "Client"

CONVERSATIONAL = frozenset({ORCHESTRATOR, AUTHENTICATOR, FULFILLMENT, REACT})


class Mode(Enum):
    REACT = "react"
    NO_PERSONALIZATION = "noper"
    WARPP = "warpp"

    @classmethod
    def parse(cls, value: Union[str, "Mode"]) -> "Mode":
        if isinstance(value, cls):
            return value
        lowered = str(value).lower()
        for mode in cls:
            if lowered in (mode.value, mode.name.lower(), mode.label.lower()):
                return mode
        raise ValueError(f"Unknown mode: {value}")

    @property
    def label(self) -> str:
        return {"react": "React", "noper": "NoPersonalization", "warpp": "Warpp"}[self.value]


class Stage(Enum):
    ORCHESTRATION = "Orchestration"
    AUTH_AND_PERSONALIZE = "AuthAndPersonalize"
    FULFILLMENT = "Fulfillment"
    CLOSED = "Closed"

    @property
    def order(self) -> int:
        return list(Stage).index(self)


class EventKind(Enum):
    AGENT_TRANSITION = "AgentTransition"
    TOOL_INVOCATION = "ToolInvocation"
    UTTERANCE = "Utterance"
    HANDOFF = "Handoff"
    THOUGHT = "Thought"
    FALLBACK = "Fallback"


@dataclass(frozen=True)
class AgentEvent:
    kind: EventKind
    agent: str
    role: str = "agent"
    stage: str = Stage.ORCHESTRATION.value
    source: Optional[str] = None
    tool: Optional[str] = None
    params: Optional[Dict[str, Any]] = None
    outcome: Optional[str] = None
    text: Optional[str] = None
    tokens_in: int = 0
    tokens_out: int = 0
    at: int = 0
    seq: int = 0
    lane: str = "main"

    def __post_init__(self):
        if self.kind is EventKind.TOOL_INVOCATION and (self.tool is None or self.params is None):
            raise ValueError("A tool invocation needs a tool name and parameters")

    @property
    def is_tool(self) -> bool:
        return self.kind is EventKind.TOOL_INVOCATION

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "kind": self.kind.value,
            "agent": self.agent,
            "role": self.role,
            "stage": self.stage,
            "tokens_in": self.tokens_in,
            "tokens_out": self.tokens_out,
            "at": self.at,
            "seq": self.seq,
            "lane": self.lane,
        }
        for name in ("source", "tool", "params", "outcome", "text"):
            value = getattr(self, name)
            if value is not None:
                data[name] = value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AgentEvent":
        fields = dict(data)
        fields["kind"] = EventKind(fields["kind"])
        return cls(**fields)


@dataclass
class Trajectory:
    session_id: str
    profile_id: int
    mode: str
    seed: int
    intent: Optional[str] = None
    events: List[AgentEvent] = field(default_factory=list)
    status: str = "open"
    elapsed_ms: int = 0
    pre_fulfillment_ms: int = 0
    fulfillment_ms: int = 0
    personalizer_tokens: int = 0

    def append(self, event: AgentEvent) -> AgentEvent:
        event = replace(event, seq=len(self.events))
        self.events.append(event)
        return event

    def extend(self, events: Iterable[AgentEvent]) -> None:
        for event in events:
            self.append(event)

    def tool_events(self, scope: str = "overall") -> List[AgentEvent]:
        """Tool invocations, all of them or only those made during fulfillment."""
        if scope not in ("overall", "fulfillment"):
            raise ValueError(f"Unknown scope: {scope}")
        return [
            e
            for e in self.events
            if e.is_tool and (scope == "overall" or e.stage == Stage.FULFILLMENT.value)
        ]

    def tool_names(self, scope: str = "overall") -> List[str]:
        return [e.tool for e in self.tool_events(scope)]

    def transitions(self) -> List[Tuple[str, str]]:
        return [(e.source, e.agent) for e in self.events if e.kind is EventKind.AGENT_TRANSITION]

    def signature(self) -> List[Tuple[str, ...]]:
        """Ordered agent transitions and tool names, parameters excluded."""
        signature: List[Tuple[str, ...]] = []
        for e in self.events:
            if e.kind is EventKind.AGENT_TRANSITION:
                signature.append(("transition", e.source or "", e.agent))
            elif e.is_tool:
                signature.append(("tool", e.tool))
        return signature

    def _conversational(self) -> List[AgentEvent]:
        return [e for e in self.events if e.agent in CONVERSATIONAL]

    @property
    def tokens_in(self) -> int:
        return sum(e.tokens_in for e in self._conversational())

    @property
    def tokens_out(self) -> int:
        return sum(e.tokens_out for e in self._conversational())

    @property
    def tokens(self) -> int:
        return self.tokens_in + self.tokens_out

    def header(self) -> Dict[str, Any]:
        return {
            "session_id": self.session_id,
            "profile_id": self.profile_id,
            "intent": self.intent,
            "mode": self.mode,
            "seed": self.seed,
            "status": self.status,
            "elapsed_ms": self.elapsed_ms,
            "pre_fulfillment_ms": self.pre_fulfillment_ms,
            "fulfillment_ms": self.fulfillment_ms,
            "personalizer_tokens": self.personalizer_tokens,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {**self.header(), "events": [e.to_dict() for e in self.events]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Trajectory":
        fields = {k: v for k, v in data.items() if k not in ("events", "type", "meta")}
        trajectory = cls(**fields)
        trajectory.events = [AgentEvent.from_dict(e) for e in data.get("events", [])]
        return trajectory

    def to_jsonl(self, meta: Optional[Dict[str, Any]] = None) -> str:
        header = {"type": "session", **self.header()}
        if meta:
            header["meta"] = meta
        lines = [json.dumps(header, sort_keys=True)]
        lines.extend(
            json.dumps({"type": "event", **e.to_dict()}, sort_keys=True) for e in self.events
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Trajectory":
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not records or records[0].get("type") != "session":
            raise ValueError("Trajectory log must start with a session header")
        header = records[0]
        events = [{k: v for k, v in r.items() if k != "type"} for r in records[1:]]
        return cls.from_dict({**header, "events": events})

    def write(self, path: Union[str, Path], meta: Optional[Dict[str, Any]] = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_jsonl(meta), encoding="utf-8")
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "Trajectory":
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))


def read_meta(path: Union[str, Path]) -> Dict[str, Any]:
    """Metadata block of a trajectory log's header line."""
    with open(path, "r", encoding="utf-8") as f:
        header = json.loads(f.readline())
    return header.get("meta", {})
