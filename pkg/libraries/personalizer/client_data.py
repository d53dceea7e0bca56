"""Client attribute records the personalizer evaluates conditions against."""

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, Mapping

from libraries.tools import ToolOutcome, ToolSet
from libraries.workflow.paths import MISSING, lookup


@dataclass(frozen=True)
class ClientData:
    """
    Known attributes of one customer.

    ``attributes`` maps dotted paths to values and always holds
    ``customer_id``. ``info_results`` keeps each info tool's payload so the
    pruner can report what replaced a call. Paths listed in ``nullable`` read
    as null when absent instead of raising.
    """

    customer_id: int
    attributes: Mapping[str, Any] = field(default_factory=dict)
    info_results: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    nullable: FrozenSet[str] = frozenset()

    def __post_init__(self):
        if isinstance(self.customer_id, bool) or not isinstance(self.customer_id, int):
            raise ValueError(f"customer_id must be an integer, got {self.customer_id!r}")
        if self.customer_id <= 0:
            raise ValueError(f"customer_id must be positive, got {self.customer_id}")

    def value(self, path: str) -> Any:
        """Attribute value, None for absent nullable paths, MISSING otherwise."""
        value = lookup(self.attributes, path)
        if value is MISSING and path in self.nullable:
            return None
        return value

    def known(self, path: str) -> bool:
        value = self.value(path)
        return value is not MISSING and value is not None

    @classmethod
    def from_info_results(
        cls,
        customer_id: int,
        results: Mapping[str, Any],
        nullable: Iterable[str] = (),
    ) -> "ClientData":
        """Build from info tool results (ToolOutcome objects or bare payloads)."""
        info: Dict[str, Dict[str, Any]] = {}
        attributes: Dict[str, Any] = {"customer_id": customer_id}
        for tool, result in results.items():
            payload = dict(result.payload if isinstance(result, ToolOutcome) else result)
            info[tool] = payload
            attributes.update(payload)
        return cls(customer_id, attributes, info, frozenset(nullable))

    @classmethod
    def from_record(
        cls, record: Mapping[str, Any], toolset: ToolSet, nullable: Iterable[str] = ()
    ) -> "ClientData":
        """Read every info tool's fields straight from a customer record."""
        results = {}
        for spec in toolset.info_tools:
            payload = {}
            for path in spec.fields:
                value = lookup(record, path)
                payload[path] = None if value is MISSING else value
            results[spec.name] = payload
        return cls.from_info_results(int(record["customer_id"]), results, nullable)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "customer_id": self.customer_id,
            "attributes": dict(self.attributes),
            "info_results": {tool: dict(payload) for tool, payload in self.info_results.items()},
            "nullable": sorted(self.nullable),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ClientData":
        return cls(
            customer_id=int(data["customer_id"]),
            attributes=dict(data.get("attributes", {})),
            info_results={k: dict(v) for k, v in data.get("info_results", {}).items()},
            nullable=frozenset(data.get("nullable", ())),
        )
