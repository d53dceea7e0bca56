"""
Intent catalog: domains, their intents and the fixtures behind each one.

``domains.json`` maps every domain to its intents; each intent names its
workflow, tool manifest, profile schema, utterance pool and aliases, with
paths relative to the index file. Loading parses and cross-checks all of it
up front so a session never meets a broken fixture halfway through.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import jsonschema
from robot.api import logger

from libraries.datagen import IntentSchema, check_schema, load_schema, load_utterances
from libraries.tools import LatencySpec, ToolSet, load_toolset
from libraries.tools.registry import DEFAULT_FAILURE_RATE, DEFAULT_LATENCY
from libraries.workflow import TERMINAL_TOOL, Workflow, parse_workflow

from .errors import OrchestrationError, UnknownDomain

FIXTURES_DIR = Path(__file__).resolve().parents[2] / "fixtures"
DEFAULT_INDEX = FIXTURES_DIR / "domains.json"

INDEX_SCHEMA = {
    "type": "object",
    "required": ["system_tools", "domains"],
    "properties": {
        "system_tools": {"type": "string"},
        "domains": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": {
                "type": "object",
                "required": ["intents"],
                "properties": {
                    "description": {"type": "string"},
                    "intents": {
                        "type": "object",
                        "minProperties": 1,
                        "additionalProperties": {
                            "type": "object",
                            "required": ["workflow", "tools", "schema", "utterances", "aliases"],
                            "properties": {
                                "workflow": {"type": "string"},
                                "tools": {"type": "string"},
                                "schema": {"type": "string"},
                                "utterances": {"type": "string"},
                                "aliases": {
                                    "type": "array",
                                    "items": {"type": "string", "minLength": 1},
                                    "minItems": 1,
                                },
                            },
                        },
                    },
                },
            },
        },
    },
}


@dataclass(frozen=True)
class IntentEntry:
    name: str
    domain: str
    workflow: Workflow
    toolset: ToolSet
    schema: IntentSchema
    utterances: Tuple[str, ...]
    aliases: Tuple[str, ...]


@dataclass(frozen=True)
class Catalog:
    system_tools: ToolSet
    domains: Dict[str, Dict[str, IntentEntry]]
    descriptions: Dict[str, str]

    def domain(self, name: str) -> Dict[str, IntentEntry]:
        if name not in self.domains:
            raise UnknownDomain(name)
        return self.domains[name]

    def intents(self, domain: Optional[str] = None) -> List[IntentEntry]:
        """Intents of one domain, or of all domains, in registry order."""
        if domain is not None:
            return list(self.domain(domain).values())
        return [entry for entries in self.domains.values() for entry in entries.values()]

    def intent(self, name: str, domain: Optional[str] = None) -> IntentEntry:
        for entry in self.intents(domain):
            if entry.name == name:
                return entry
        raise OrchestrationError(f"Intent {name} is not registered")

    def domain_of(self, intent: str) -> str:
        return self.intent(intent).domain

    def with_toolsets(self, transform) -> "Catalog":
        """Copy with ``transform`` applied to the system and every intent tool set."""
        domains = {
            domain: {
                name: IntentEntry(
                    entry.name,
                    entry.domain,
                    entry.workflow,
                    transform(entry.toolset),
                    entry.schema,
                    entry.utterances,
                    entry.aliases,
                )
                for name, entry in entries.items()
            }
            for domain, entries in self.domains.items()
        }
        return Catalog(transform(self.system_tools), domains, dict(self.descriptions))

    @classmethod
    def load(
        cls,
        index: Union[str, Path, None] = None,
        max_depth: int = 8,
        terminal_tool: str = TERMINAL_TOOL,
        default_latency: LatencySpec = DEFAULT_LATENCY,
        default_failure_rate: float = DEFAULT_FAILURE_RATE,
    ) -> "Catalog":
        """
        Load every domain and intent listed in a ``domains.json`` index.

        Args:
            index: Index file; defaults to the bundled fixtures
            max_depth: Branch depth limit for workflow validation
            terminal_tool: Case-closing tool name
            default_latency: Latency for tools declaring none
            default_failure_rate: Failure rate for exec tools declaring none

        Returns:
            Catalog

        Raises:
            OrchestrationError: Unreadable or invalid index
            WorkflowError, ToolError, DatagenError: Invalid fixture files
        """
        index = Path(index) if index else DEFAULT_INDEX
        try:
            with open(index, "r", encoding="utf-8") as f:
                document: Dict[str, Any] = json.load(f)
            jsonschema.validate(document, INDEX_SCHEMA)
        except (OSError, ValueError) as e:
            raise OrchestrationError(f"Cannot read intent index {index}: {e}") from e
        except jsonschema.ValidationError as e:
            raise OrchestrationError(f"Invalid intent index {index}: {e.message}") from e

        root = index.parent
        system_tools = load_toolset(
            root / document["system_tools"], default_latency, default_failure_rate
        )
        domains: Dict[str, Dict[str, IntentEntry]] = {}
        descriptions: Dict[str, str] = {}
        for domain, spec in document["domains"].items():
            descriptions[domain] = spec.get("description", "")
            domains[domain] = {}
            for name, files in spec["intents"].items():
                toolset = load_toolset(root / files["tools"], default_latency, default_failure_rate)
                workflow = parse_workflow(
                    (root / files["workflow"]).read_text(encoding="utf-8"),
                    tool_names=toolset.names,
                    max_depth=max_depth,
                    terminal_tool=terminal_tool,
                )
                schema = load_schema(root / files["schema"])
                if (workflow.intent, workflow.domain) != (name, domain):
                    raise OrchestrationError(
                        f"{files['workflow']} declares {workflow.domain}/{workflow.intent}, "
                        f"expected {domain}/{name}"
                    )
                check_schema(schema, workflow, toolset)
                domains[domain][name] = IntentEntry(
                    name=name,
                    domain=domain,
                    workflow=workflow,
                    toolset=toolset,
                    schema=schema,
                    utterances=load_utterances(root / files["utterances"]),
                    aliases=tuple(files["aliases"]),
                )
        logger.info(
            f"Loaded {sum(len(d) for d in domains.values())} intents across {len(domains)} domains"
        )
        return cls(system_tools, domains, descriptions)
