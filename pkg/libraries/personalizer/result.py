"""Trim results and their audit trail."""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, Optional, Tuple, Union

from libraries.tools import ToolSet
from libraries.workflow import Workflow, serialize_workflow


class EditKind(Enum):
    PRUNED_BRANCH = "PrunedBranch"
    INLINED_VALUE = "InlinedValue"
    MERGED_STEPS = "MergedSteps"
    RENUMBERED = "Renumbered"
    TERMINATED_EARLY = "TerminatedEarly"
    RESTORED_BRANCH = "RestoredBranch"
    RESTORED_STEP = "RestoredStep"
    REMOVED_UNREACHABLE = "RemovedUnreachable"
    ADDED_TERMINAL = "AddedTerminal"


@dataclass(frozen=True)
class TrimEdit:
    kind: EditKind
    at: str
    detail: str = ""

    def to_dict(self) -> Dict[str, str]:
        return {"kind": self.kind.value, "at": self.at, "detail": self.detail}


@dataclass(frozen=True)
class TrimStats:
    """Work counters of one trim: steps visited while pruning, tools visited while filtering."""

    step_visits: int = 0
    tool_visits: int = 0

    def within_linear_bound(self, steps: int, tools: int) -> bool:
        return self.step_visits + self.tool_visits <= steps + tools


@dataclass(frozen=True)
class TrimResult:
    workflow: Workflow
    tools: FrozenSet[str]
    provenance: Tuple[TrimEdit, ...] = ()
    toolset: Optional[ToolSet] = None
    stats: TrimStats = field(default_factory=TrimStats)

    def edits_of(self, kind: EditKind) -> Tuple[TrimEdit, ...]:
        return tuple(edit for edit in self.provenance if edit.kind is kind)

    def to_artifacts(self) -> Dict[str, Any]:
        return {
            "workflow": serialize_workflow(self.workflow),
            "tools": sorted(self.tools),
            "edits": [edit.to_dict() for edit in self.provenance],
        }

    def write(self, directory: Union[str, Path], stem: Optional[str] = None) -> Dict[str, Path]:
        """Write ``<stem>.wf``, ``<stem>.tools.json`` and ``<stem>.edits.json``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        stem = stem or self.workflow.id
        artifacts = self.to_artifacts()
        paths = {
            "workflow": directory / f"{stem}.wf",
            "tools": directory / f"{stem}.tools.json",
            "edits": directory / f"{stem}.edits.json",
        }
        paths["workflow"].write_text(artifacts["workflow"], encoding="utf-8")
        paths["tools"].write_text(json.dumps(artifacts["tools"], indent=2) + "\n", encoding="utf-8")
        paths["edits"].write_text(json.dumps(artifacts["edits"], indent=2) + "\n", encoding="utf-8")
        return paths
