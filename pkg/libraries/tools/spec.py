"""Tool declarations and invocation results."""

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

INFO_SUFFIX = "_extra"
API_FAILURE = "api_failure"

PARAM_TYPES: Dict[str, Tuple[type, ...]] = {
    "integer": (int,),
    "number": (int, float),
    "string": (str,),
    "boolean": (bool,),
    "object": (dict,),
    "array": (list, tuple),
    "any": (object,),
}


class ToolKind(Enum):
    INFO = "info"
    EXEC = "exec"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: str = "any"
    required: bool = True

    def accepts(self, value: Any) -> bool:
        if self.type == "any":
            return True
        if isinstance(value, bool) and self.type not in ("boolean", "any"):
            return False
        return isinstance(value, PARAM_TYPES[self.type])


@dataclass(frozen=True)
class LatencySpec:
    """Fixed or uniform latency in milliseconds."""

    low: int
    high: int

    @classmethod
    def fixed(cls, ms: int) -> "LatencySpec":
        return cls(ms, ms)

    @classmethod
    def from_manifest(cls, data: Dict[str, Any]) -> "LatencySpec":
        if "fixed" in data:
            return cls.fixed(int(data["fixed"]))
        low, high = data["uniform"]
        return cls(int(low), int(high))

    def sample(self, rng: random.Random) -> int:
        if self.low == self.high:
            return self.low
        return rng.randint(self.low, self.high)

    def to_manifest(self) -> Dict[str, Any]:
        if self.low == self.high:
            return {"fixed": self.low}
        return {"uniform": [self.low, self.high]}


@dataclass(frozen=True)
class ToolSpec:
    name: str
    kind: ToolKind
    description: str = ""
    params: Tuple[ParamSpec, ...] = ()
    outcomes: Tuple[str, ...] = ("ok",)
    weights: Optional[Tuple[float, ...]] = None
    fields: Tuple[str, ...] = ()
    returns: Tuple[Tuple[str, Any], ...] = ()
    latency: LatencySpec = field(default_factory=lambda: LatencySpec(50, 200))
    failure_rate: float = 0.0

    @property
    def is_info(self) -> bool:
        return self.kind is ToolKind.INFO

    @property
    def nominal_outcome(self) -> str:
        return self.outcomes[0]

    def docstring(self) -> Dict[str, Any]:
        """The structured description shown to an agent for this tool."""
        return {
            "name": self.name,
            "description": self.description,
            "parameters": [
                {"name": p.name, "type": p.type, "required": p.required} for p in self.params
            ],
            "returns": list(self.fields) or [name for name, _ in self.returns],
        }

    def schema_tokens(self) -> int:
        return len(json.dumps(self.docstring(), sort_keys=True).split())


@dataclass(frozen=True)
class ToolOutcome:
    tool: str
    outcome: str
    payload: Dict[str, Any] = field(default_factory=dict)
    elapsed: int = 0
    failed: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool": self.tool,
            "outcome": self.outcome,
            "payload": self.payload,
            "elapsed": self.elapsed,
            "failed": self.failed,
        }
