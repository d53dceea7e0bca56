"""
Intent schemas: the fields a profile carries and how each one is drawn.

A field declares exactly one value source:

    values      finite domain, uniform unless ``weights`` is given
    range       inclusive integer range
    faker       Faker provider name plus optional ``args``
    date_range  inclusive ISO date range

``null_weight`` makes a field null with that probability before drawing.
"""

import json
import math
import random
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Any, Dict, FrozenSet, Mapping, Optional, Set, Tuple, Union

import jsonschema
from faker import Faker

from libraries.tools import ToolSet
from libraries.workflow import ActionKind, ArgKind, Workflow

from .errors import DatagenError, SchemaIncomplete

REPLY_LITERALS = ("yes", "no")
USER_INFO = "user_provided_info"

SCHEMA = {
    "type": "object",
    "required": ["intent", "domain", "fields"],
    "properties": {
        "intent": {"type": "string"},
        "domain": {"type": "string"},
        "fields": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["path"],
                "additionalProperties": False,
                "properties": {
                    "path": {"type": "string", "minLength": 1},
                    "values": {"type": "array", "minItems": 1},
                    "weights": {"type": "array", "items": {"type": "number", "minimum": 0}},
                    "range": {
                        "type": "array",
                        "items": {"type": "integer"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                    "faker": {"type": "string"},
                    "args": {"type": "array"},
                    "date_range": {
                        "type": "array",
                        "items": {"type": "string", "format": "date"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                    "null_weight": {"type": "number", "minimum": 0, "maximum": 1},
                },
                "oneOf": [
                    {"required": ["values"]},
                    {"required": ["range"]},
                    {"required": ["faker"]},
                    {"required": ["date_range"]},
                ],
            },
        },
        "nullable": {"type": "array", "items": {"type": "string"}},
        "reply_policy": {"type": "object", "additionalProperties": {"type": "string"}},
    },
}


@dataclass(frozen=True)
class FieldSpec:
    path: str
    kind: str
    values: Tuple[Any, ...] = ()
    weights: Optional[Tuple[float, ...]] = None
    low: int = 0
    high: int = 0
    provider: str = ""
    args: Tuple[Any, ...] = ()
    start: Optional[date] = None
    end: Optional[date] = None
    null_weight: float = 0.0

    @classmethod
    def from_dict(cls, entry: Mapping[str, Any]) -> "FieldSpec":
        path = entry["path"]
        null_weight = float(entry.get("null_weight", 0.0))
        if "values" in entry:
            values = tuple(entry["values"])
            weights = entry.get("weights")
            if weights is not None:
                if len(weights) != len(values):
                    raise DatagenError(f"{path}: {len(weights)} weights for {len(values)} values")
                if not math.isclose(sum(weights), 1.0, abs_tol=1e-6):
                    raise DatagenError(f"{path}: weights sum to {sum(weights)}, not 1")
                weights = tuple(float(w) for w in weights)
            return cls(path, "values", values=values, weights=weights, null_weight=null_weight)
        if "range" in entry:
            low, high = entry["range"]
            if low > high:
                raise DatagenError(f"{path}: empty range [{low}, {high}]")
            return cls(path, "range", low=low, high=high, null_weight=null_weight)
        if "faker" in entry:
            return cls(
                path,
                "faker",
                provider=entry["faker"],
                args=tuple(entry.get("args", ())),
                null_weight=null_weight,
            )
        start, end = (date.fromisoformat(d) for d in entry["date_range"])
        if start > end:
            raise DatagenError(f"{path}: date range ends before it starts")
        return cls(path, "date_range", start=start, end=end, null_weight=null_weight)

    def draw(self, rng: random.Random, fake: Faker) -> Any:
        """Draw one value; ``rng`` and ``fake`` must both be seeded by the caller."""
        if self.null_weight and rng.random() < self.null_weight:
            return None
        if self.kind == "values":
            if self.weights is None:
                return rng.choice(self.values)
            return rng.choices(self.values, weights=self.weights, k=1)[0]
        if self.kind == "range":
            return rng.randint(self.low, self.high)
        if self.kind == "faker":
            value = getattr(fake, self.provider)(*self.args)
            return value.isoformat() if hasattr(value, "isoformat") else value
        offset = rng.randint(0, (self.end - self.start).days)
        return (self.start + timedelta(days=offset)).isoformat()

    @property
    def is_attribute(self) -> bool:
        return not self.path.startswith(USER_INFO + ".")


@dataclass(frozen=True)
class IntentSchema:
    intent: str
    domain: str
    fields: Tuple[FieldSpec, ...]
    nullable: FrozenSet[str] = frozenset()
    reply_policy: Mapping[str, str] = field(default_factory=dict)

    def covers(self, path: str) -> bool:
        """True when ``path`` is a field or a parent of one."""
        return any(f.path == path or f.path.startswith(path + ".") for f in self.fields)

    @property
    def attribute_paths(self) -> Tuple[str, ...]:
        return tuple(f.path for f in self.fields if f.is_attribute)

    def to_dict(self) -> Dict[str, Any]:
        entries = []
        for f in self.fields:
            entry: Dict[str, Any] = {"path": f.path}
            if f.kind == "values":
                entry["values"] = list(f.values)
                if f.weights is not None:
                    entry["weights"] = list(f.weights)
            elif f.kind == "range":
                entry["range"] = [f.low, f.high]
            elif f.kind == "faker":
                entry["faker"] = f.provider
                if f.args:
                    entry["args"] = list(f.args)
            else:
                entry["date_range"] = [f.start.isoformat(), f.end.isoformat()]
            if f.null_weight:
                entry["null_weight"] = f.null_weight
            entries.append(entry)
        return {
            "intent": self.intent,
            "domain": self.domain,
            "fields": entries,
            "nullable": sorted(self.nullable),
            "reply_policy": dict(self.reply_policy),
        }


def load_schema(source: Union[str, Path, Mapping[str, Any]]) -> IntentSchema:
    """
    Load and validate an intent schema.

    Args:
        source: Path to a JSON schema file, or the decoded document

    Returns:
        IntentSchema

    Raises:
        DatagenError: Invalid document, weights or ranges
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8") as f:
                document = json.load(f)
        except (OSError, ValueError) as e:
            raise DatagenError(f"Cannot read schema {source}: {e}") from e
    else:
        document = source

    try:
        jsonschema.validate(document, SCHEMA)
    except jsonschema.ValidationError as e:
        raise DatagenError(f"Invalid intent schema: {e.message}") from e

    fields = tuple(FieldSpec.from_dict(entry) for entry in document["fields"])
    paths = [f.path for f in fields]
    if len(set(paths)) != len(paths):
        raise DatagenError(f"{document['intent']}: duplicate field paths")
    return IntentSchema(
        intent=document["intent"],
        domain=document["domain"],
        fields=fields,
        nullable=frozenset(document.get("nullable", ())),
        reply_policy=dict(document.get("reply_policy", {})),
    )


def check_schema(schema: IntentSchema, workflow: Workflow, toolset: ToolSet) -> None:
    """
    Make sure profiles drawn from ``schema`` can drive ``workflow`` to the end.

    Every info tool field, tested attribute, prompt key and argument path
    must be producible by the schema or answered by its reply policy.

    Raises:
        SchemaIncomplete: Listing every uncovered path
    """
    missing: Set[str] = set()
    prompts: Set[str] = set()

    for spec in toolset.info_tools:
        missing.update(path for path in spec.fields if not schema.covers(path))

    for step, _ in workflow.iter_steps():
        for action in step.actions:
            if action.kind is ActionKind.PROMPT:
                prompts.add(action.key)
        for branch in step.branches:
            condition = branch.condition
            if not condition.is_runtime and not schema.covers(condition.subject):
                missing.add(condition.subject)

    missing.update(f"reply:{key}" for key in prompts if key not in schema.reply_policy)
    for key, answer in schema.reply_policy.items():
        if answer not in REPLY_LITERALS and not schema.covers(answer):
            missing.add(answer)

    for action in workflow.tool_calls():
        for _, expr in action.args:
            if expr.kind is not ArgKind.ATTR or expr.path == "customer_id":
                continue
            if expr.path.split(".", 1)[0] in prompts or schema.covers(expr.path):
                continue
            missing.add(expr.path)

    if missing:
        raise SchemaIncomplete(schema.intent, missing)
