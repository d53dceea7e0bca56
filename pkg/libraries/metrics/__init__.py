"""Adherence and efficiency metrics, error injection and result tables."""

from .adherence import (
    PRF,
    RunScores,
    agent_match,
    exact_match,
    lcs_length,
    lcs_tools,
    param_match,
    prf,
    score,
    scores_to_dict,
    tool_prf,
)
from .errors import MetricsError, MissingGroundTruth, MixedSeeds
from .perturb import CORRUPTED, HALLUCINATED_PREFIX, PerturbSpec, perturb
from .report import (
    COLUMNS,
    HEADERS,
    RunReport,
    aggregate,
    build_report,
    check_seeds,
    round_rows,
    write_csv,
    write_json,
)
from .MetricsLibrary import MetricsLibrary

__version__ = "1.0.0"
__all__ = [
    "COLUMNS",
    "CORRUPTED",
    "HALLUCINATED_PREFIX",
    "HEADERS",
    "MetricsError",
    "MetricsLibrary",
    "MissingGroundTruth",
    "MixedSeeds",
    "PRF",
    "PerturbSpec",
    "RunReport",
    "RunScores",
    "agent_match",
    "aggregate",
    "build_report",
    "check_seeds",
    "exact_match",
    "lcs_length",
    "lcs_tools",
    "param_match",
    "perturb",
    "prf",
    "round_rows",
    "score",
    "scores_to_dict",
    "tool_prf",
    "write_csv",
    "write_json",
]
