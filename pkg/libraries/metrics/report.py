"""
Per-run reports and their aggregation into result tables.

A RunReport holds every metric of one predicted run. ``aggregate`` groups
reports by intent and strategy and averages them with numpy; values keep
full precision until ``write_csv``/``write_json`` round them.
"""

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from libraries.orchestration import Mode, Trajectory
from libraries.personalizer import Audit

from .adherence import score, scores_to_dict
from .errors import MixedSeeds

DECIMALS = 2

# (column, RunReport field, statistic)
COLUMNS = (
    ("Exact Match", "exact_match", "mean"),
    ("Agent Match (Ordered)", "agent_match_ordered", "mean"),
    ("Agent Match (Any)", "agent_match_any", "mean"),
    ("LCS Tools", "lcs_tools", "mean"),
    ("Tool Precision", "tool_precision", "mean"),
    ("Tool Recall", "tool_recall", "mean"),
    ("Tool F1", "tool_f1", "mean"),
    ("Fulfill Tool Precision", "fulfillment_tool_precision", "mean"),
    ("Fulfill Tool Recall", "fulfillment_tool_recall", "mean"),
    ("Fulfill Tool F1", "fulfillment_tool_f1", "mean"),
    ("Param Match", "param_match", "mean"),
    ("Token Usage", "tokens", "mean"),
    ("Latency", "latency_ms", "mean"),
    ("Fulfill Latency", "fulfillment_latency_ms", "mean"),
    ("Rel. Avg", "relevance", "mean"),
    ("Rel. Std", "relevance", "std"),
    ("Comp. Avg", "completeness", "mean"),
    ("Comp. Std", "completeness", "std"),
)
KEY_COLUMNS = ("Intent", "Strategy", "Runs")
HEADERS = KEY_COLUMNS + tuple(column for column, _, _ in COLUMNS)


@dataclass(frozen=True)
class RunReport:
    intent: str
    mode: str
    profile_id: int
    seed: int
    exact_match: int
    agent_match_ordered: float
    agent_match_any: float
    lcs_tools: float
    tool_precision: float
    tool_recall: float
    tool_f1: float
    fulfillment_tool_precision: float
    fulfillment_tool_recall: float
    fulfillment_tool_f1: float
    param_match: float
    tokens: int
    latency_ms: int
    fulfillment_latency_ms: int
    relevance: Optional[int] = None
    completeness: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunReport":
        return cls(**data)


def build_report(pred: Trajectory, gt: Trajectory, audit: Optional[Audit] = None) -> RunReport:
    """
    Score a predicted run against its ground truth.

    Token usage and latency come from the predicted run; the audit, when
    given, adds the trimmed workflow's relevance and completeness.
    """
    return RunReport(
        intent=gt.intent or pred.intent or "",
        mode=pred.mode,
        profile_id=pred.profile_id,
        seed=pred.seed,
        **scores_to_dict(score(pred, gt)),
        tokens=pred.tokens,
        latency_ms=pred.elapsed_ms,
        fulfillment_latency_ms=pred.fulfillment_ms,
        relevance=audit.relevance if audit else None,
        completeness=audit.completeness if audit else None,
    )


def check_seeds(reports: Iterable[RunReport]) -> int:
    """The single seed shared by all reports."""
    seeds = {report.seed for report in reports}
    if len(seeds) > 1:
        raise MixedSeeds(seeds)
    return seeds.pop() if seeds else 0


def _statistic(values: Sequence[Optional[float]], statistic: str) -> Optional[float]:
    present = np.array([v for v in values if v is not None], dtype=float)
    if present.size == 0:
        return None
    if statistic == "std":
        return float(np.std(present))
    return float(np.mean(present))


def _mode_rank(mode: str) -> int:
    try:
        return list(Mode).index(Mode.parse(mode))
    except ValueError:
        return len(Mode)


def aggregate(reports: Sequence[RunReport]) -> List[Dict[str, Any]]:
    """
    Table rows grouped by intent and strategy.

    Intents keep the order they first appear in; strategies follow React,
    NoPersonalization, Warpp. Audit columns stay empty for groups without
    audits.

    Raises:
        ValueError: No reports
    """
    if not reports:
        raise ValueError("Nothing to aggregate")
    intents: List[str] = []
    groups: Dict[tuple, List[RunReport]] = {}
    for report in reports:
        if report.intent not in intents:
            intents.append(report.intent)
        groups.setdefault((report.intent, report.mode), []).append(report)

    rows = []
    for intent, mode in sorted(groups, key=lambda k: (intents.index(k[0]), _mode_rank(k[1]))):
        members = groups[(intent, mode)]
        try:
            strategy = Mode.parse(mode).label
        except ValueError:
            strategy = mode
        row: Dict[str, Any] = {"Intent": intent, "Strategy": strategy, "Runs": len(members)}
        for column, name, statistic in COLUMNS:
            row[column] = _statistic([getattr(r, name) for r in members], statistic)
        rows.append(row)
    return rows


def round_rows(rows: Iterable[Dict[str, Any]], decimals: int = DECIMALS) -> List[Dict[str, Any]]:
    return [
        {k: round(v, decimals) if isinstance(v, float) else v for k, v in row.items()} for row in rows
    ]


def write_csv(rows: Iterable[Dict[str, Any]], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(HEADERS))
        writer.writeheader()
        for row in round_rows(rows):
            writer.writerow({k: "" if v is None else v for k, v in row.items()})
    return path


def write_json(
    rows: Iterable[Dict[str, Any]],
    path: Union[str, Path],
    meta: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"meta": meta or {}, "columns": list(HEADERS), "rows": round_rows(rows)}
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
