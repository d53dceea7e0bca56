"""Deterministic workflow personalization: prune, restore fidelity, clean up."""

from .audit import Audit, audit
from .cleanup import pass3_cleanup
from .client_data import ClientData
from .errors import FidelityViolation, MissingAttribute, PersonalizerError
from .fidelity import pass2_fidelity
from .oracle import OracleTrim, call_paths, oracle_trim
from .prune import pass1_prune
from .result import EditKind, TrimEdit, TrimResult, TrimStats
from .trim import trim
from .PersonalizerLibrary import PersonalizerLibrary

__version__ = "1.0.0"
__all__ = [
    "Audit",
    "ClientData",
    "EditKind",
    "FidelityViolation",
    "MissingAttribute",
    "OracleTrim",
    "PersonalizerError",
    "PersonalizerLibrary",
    "TrimEdit",
    "TrimResult",
    "TrimStats",
    "audit",
    "call_paths",
    "oracle_trim",
    "pass1_prune",
    "pass2_fidelity",
    "pass3_cleanup",
    "trim",
]
