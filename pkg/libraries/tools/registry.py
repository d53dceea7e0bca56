"""
Tool sets loaded from JSON manifests and simulated tool invocation.

Info tools read the customer record; exec tools draw latency, failure and
outcome from a per-call seeded generator, so a call is a pure function of
(spec, args, record, seed).
"""

import hashlib
import json
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Tuple, Union

import jsonschema
from robot.api import logger

from libraries.workflow.paths import MISSING, lookup

from .errors import ManifestError, MissingArg, TypeMismatch, UnknownTool
from .spec import (
    API_FAILURE,
    INFO_SUFFIX,
    PARAM_TYPES,
    LatencySpec,
    ParamSpec,
    ToolKind,
    ToolOutcome,
    ToolSpec,
)

DEFAULT_LATENCY = LatencySpec(50, 200)
DEFAULT_FAILURE_RATE = 0.02

_LATENCY_SCHEMA = {
    "type": "object",
    "oneOf": [
        {"required": ["fixed"], "properties": {"fixed": {"type": "integer", "minimum": 0}}},
        {
            "required": ["uniform"],
            "properties": {
                "uniform": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 0},
                    "minItems": 2,
                    "maxItems": 2,
                }
            },
        },
    ],
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["domain", "intent", "tools"],
    "properties": {
        "domain": {"type": "string"},
        "intent": {"type": "string"},
        "tools": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "kind"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"},
                    "kind": {"enum": ["info", "exec"]},
                    "description": {"type": "string"},
                    "params": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["name"],
                            "additionalProperties": False,
                            "properties": {
                                "name": {"type": "string"},
                                "type": {"enum": sorted(PARAM_TYPES)},
                                "required": {"type": "boolean"},
                            },
                        },
                    },
                    "outcomes": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                    "weights": {"type": "array", "items": {"type": "number", "minimum": 0}},
                    "fields": {"type": "array", "items": {"type": "string"}},
                    "returns": {"type": "object"},
                    "latency": _LATENCY_SCHEMA,
                    "failure_rate": {"type": "number", "minimum": 0, "maximum": 1},
                },
            },
        },
    },
}

RETURN_GENERATORS = ("from_arg", "const", "uniform_int", "choice", "token")


@dataclass(frozen=True)
class ToolSet:
    domain: str
    intent: str
    specs: Tuple[ToolSpec, ...] = ()

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(spec.name for spec in self.specs)

    @property
    def info_tools(self) -> Tuple[ToolSpec, ...]:
        return tuple(spec for spec in self.specs if spec.is_info)

    @property
    def exec_tools(self) -> Tuple[ToolSpec, ...]:
        return tuple(spec for spec in self.specs if not spec.is_info)

    def get(self, name: str) -> ToolSpec:
        for spec in self.specs:
            if spec.name == name:
                return spec
        raise UnknownTool(name)

    def __contains__(self, name: object) -> bool:
        return any(spec.name == name for spec in self.specs)

    def __len__(self) -> int:
        return len(self.specs)

    def deterministic(self) -> "ToolSet":
        """Copy with failures disabled and every exec tool on its nominal outcome."""
        specs = tuple(replace(spec, failure_rate=0.0, weights=None) for spec in self.specs)
        return replace(self, specs=specs)

    def with_latency(self, name: str, latency: LatencySpec) -> "ToolSet":
        specs = tuple(
            replace(spec, latency=latency) if spec.name == name else spec for spec in self.specs
        )
        if name not in self:
            raise UnknownTool(name)
        return replace(self, specs=specs)

    def schema_tokens(self) -> int:
        return sum(spec.schema_tokens() for spec in self.specs)

    def to_manifest(self) -> Dict[str, Any]:
        tools = []
        for spec in self.specs:
            entry: Dict[str, Any] = {
                "name": spec.name,
                "kind": spec.kind.value,
                "description": spec.description,
                "params": [
                    {"name": p.name, "type": p.type, "required": p.required} for p in spec.params
                ],
                "outcomes": list(spec.outcomes),
                "latency": spec.latency.to_manifest(),
                "failure_rate": spec.failure_rate,
            }
            if spec.weights is not None:
                entry["weights"] = list(spec.weights)
            if spec.fields:
                entry["fields"] = list(spec.fields)
            if spec.returns:
                entry["returns"] = dict(spec.returns)
            tools.append(entry)
        return {"domain": self.domain, "intent": self.intent, "tools": tools}


def _spec_from_manifest(entry: Dict[str, Any], default_latency, default_failure_rate) -> ToolSpec:
    name = entry["name"]
    kind = ToolKind(entry["kind"])
    if (kind is ToolKind.INFO) != name.endswith(INFO_SUFFIX):
        raise ManifestError(f"{name}: the {INFO_SUFFIX!r} suffix is reserved for info tools")

    outcomes = tuple(entry.get("outcomes", ["ok"]))
    weights = entry.get("weights")
    if weights is not None:
        if len(weights) != len(outcomes) or sum(weights) <= 0:
            raise ManifestError(f"{name}: weights must match outcomes and be positive")
        weights = tuple(float(w) for w in weights)

    failure_rate = entry.get("failure_rate")
    if kind is ToolKind.INFO:
        if failure_rate not in (None, 0, 0.0):
            raise ManifestError(f"{name}: info tools cannot fail")
        failure_rate = 0.0
    elif failure_rate is None:
        failure_rate = default_failure_rate

    returns = entry.get("returns", {})
    for field_name, generator in returns.items():
        if not isinstance(generator, dict) or len(generator) != 1:
            raise ManifestError(f"{name}.{field_name}: a generator is a one-key object")
        (generator_kind,) = generator
        if generator_kind not in RETURN_GENERATORS:
            raise ManifestError(f"{name}.{field_name}: unknown generator {generator_kind!r}")

    latency = entry.get("latency")
    return ToolSpec(
        name=name,
        kind=kind,
        description=entry.get("description", ""),
        params=tuple(
            ParamSpec(p["name"], p.get("type", "any"), p.get("required", True))
            for p in entry.get("params", [])
        ),
        outcomes=outcomes,
        weights=weights,
        fields=tuple(entry.get("fields", [])),
        returns=tuple(returns.items()),
        latency=LatencySpec.from_manifest(latency) if latency else default_latency,
        failure_rate=float(failure_rate),
    )


def load_toolset(
    manifest: Union[str, Path, Mapping[str, Any]],
    default_latency: LatencySpec = DEFAULT_LATENCY,
    default_failure_rate: float = DEFAULT_FAILURE_RATE,
) -> ToolSet:
    """
    Load and validate a tool manifest.

    Args:
        manifest: Path to a JSON manifest, or the already-decoded document
        default_latency: Latency for tools that declare none
        default_failure_rate: Failure rate for exec tools that declare none

    Returns:
        Validated ToolSet

    Raises:
        ManifestError: On schema violations or duplicate names
    """
    if isinstance(manifest, (str, Path)):
        try:
            with open(manifest, "r", encoding="utf-8") as f:
                document = json.load(f)
        except (OSError, ValueError) as e:
            raise ManifestError(f"Cannot read manifest {manifest}: {e}") from e
    else:
        document = manifest

    try:
        jsonschema.validate(document, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ManifestError(f"Invalid manifest: {e.message}") from e

    specs = []
    seen = set()
    for entry in document["tools"]:
        if entry["name"] in seen:
            raise ManifestError(f"Duplicate tool name: {entry['name']}")
        seen.add(entry["name"])
        specs.append(_spec_from_manifest(entry, default_latency, default_failure_rate))

    toolset = ToolSet(document["domain"], document["intent"], tuple(specs))
    logger.debug(
        f"Loaded toolset {toolset.intent}: {len(toolset.info_tools)} info, "
        f"{len(toolset.exec_tools)} exec"
    )
    return toolset


def derive_seed(session_seed: int, tool: str, occurrence: int) -> int:
    """Stable per-call seed so draws for one tool never shift another's."""
    digest = hashlib.blake2b(f"{session_seed}:{tool}:{occurrence}".encode(), digest_size=8)
    return int(digest.hexdigest(), 16)


def _check_args(spec: ToolSpec, args: Mapping[str, Any]) -> None:
    for param in spec.params:
        if param.name not in args or args[param.name] is None:
            if param.required:
                raise MissingArg(spec.name, param.name)
            continue
        if not param.accepts(args[param.name]):
            raise TypeMismatch(spec.name, param.name, param.type, args[param.name])


def _generate(spec: ToolSpec, args: Mapping[str, Any], rng: random.Random) -> Dict[str, Any]:
    payload: Dict[str, Any] = {}
    for field_name, generator in spec.returns:
        ((kind, value),) = generator.items()
        if kind == "from_arg":
            payload[field_name] = args.get(value)
        elif kind == "const":
            payload[field_name] = value
        elif kind == "uniform_int":
            payload[field_name] = rng.randint(int(value[0]), int(value[1]))
        elif kind == "choice":
            payload[field_name] = rng.choice(list(value))
        else:
            payload[field_name] = f"{value}-{rng.randrange(10**7, 10**8)}"
    return payload


def invoke(
    toolset: ToolSet,
    call: str,
    args: Mapping[str, Any],
    client: Mapping[str, Any],
    seed: int,
) -> ToolOutcome:
    """
    Simulate one tool call.

    Args:
        toolset: Tool set declaring ``call``
        call: Tool name
        args: Argument values
        client: Customer record the info tools read from
        seed: Per-call seed (see ``derive_seed``)

    Returns:
        ToolOutcome; failed calls carry the ``api_failure`` outcome

    Raises:
        UnknownTool, MissingArg, TypeMismatch
    """
    spec = toolset.get(call)
    _check_args(spec, args)
    rng = random.Random(seed)
    elapsed = spec.latency.sample(rng)

    if spec.is_info:
        payload = {}
        for path in spec.fields:
            value = lookup(client, path)
            payload[path] = None if value is MISSING else value
        return ToolOutcome(call, spec.nominal_outcome, payload, elapsed, False)

    if spec.failure_rate > 0 and rng.random() < spec.failure_rate:
        return ToolOutcome(call, API_FAILURE, {}, elapsed, True)

    if spec.weights is None:
        outcome = spec.nominal_outcome
    else:
        outcome = rng.choices(spec.outcomes, weights=spec.weights, k=1)[0]
    return ToolOutcome(call, outcome, _generate(spec, args, rng), elapsed, False)


def filter_tools(toolset: ToolSet, keep: Iterable[str]) -> ToolSet:
    """Restrict a tool set to ``keep`` in one pass over its specs."""
    wanted = set(keep)
    specs = []
    for spec in toolset.specs:
        if spec.name in wanted:
            specs.append(spec)
            wanted.discard(spec.name)
    if wanted:
        raise UnknownTool(sorted(wanted)[0])
    return replace(toolset, specs=tuple(specs))

