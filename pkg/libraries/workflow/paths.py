"""Dotted-path helpers shared by attribute records, replies and tool payloads."""

from typing import Any, Dict, Mapping


class _Missing:
    def __repr__(self) -> str:
        return "MISSING"

    def __bool__(self) -> bool:
        return False


MISSING = _Missing()


def lookup(record: Any, path: str) -> Any:
    """Resolve ``a.b.c`` inside nested mappings; MISSING when any hop is absent."""
    if isinstance(record, Mapping) and path in record:
        return record[path]
    value = record
    for part in path.split("."):
        if isinstance(value, Mapping) and part in value:
            value = value[part]
        else:
            return MISSING
    return value


def flatten(record: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Flatten nested mappings into dotted keys; empty mappings become leaves."""
    flat: Dict[str, Any] = {}
    for key, value in record.items():
        path = f"{prefix}{key}"
        if isinstance(value, Mapping) and value:
            flat.update(flatten(value, f"{path}."))
        else:
            flat[path] = value
    return flat


def assign(record: Dict[str, Any], path: str, value: Any) -> None:
    """Set ``a.b.c`` inside nested dicts, creating intermediate levels."""
    parts = path.split(".")
    node = record
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
