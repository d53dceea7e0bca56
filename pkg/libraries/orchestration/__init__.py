"""Session state machine, dialogue backends and trajectory logs."""

from .backend import DialogueBackend, HttpDialogueBackend, ReferenceBackend, make_backend
from .catalog import Catalog, IntentEntry
from .engine import AuthResult, Engine, EngineConfig, run_session
from .errors import (
    AuthFailed,
    BarrierViolation,
    ExecutorStuck,
    OrchestrationError,
    OutOfScopeIntent,
    UnknownDomain,
)
from .events import (
    AUTHENTICATOR,
    CLIENT,
    FULFILLMENT,
    ORCHESTRATOR,
    PERSONALIZER,
    REACT,
    AgentEvent,
    EventKind,
    Mode,
    Stage,
    Trajectory,
    read_meta,
)
from .executor import Executor, FulfillmentContext, execute
from .intents import describe_services, match_intent
from .session import Session
from .OrchestrationLibrary import OrchestrationLibrary

__version__ = "1.0.0"
__all__ = [
    "AUTHENTICATOR",
    "CLIENT",
    "FULFILLMENT",
    "ORCHESTRATOR",
    "PERSONALIZER",
    "REACT",
    "AgentEvent",
    "AuthFailed",
    "AuthResult",
    "BarrierViolation",
    "Catalog",
    "DialogueBackend",
    "Engine",
    "EngineConfig",
    "EventKind",
    "Executor",
    "ExecutorStuck",
    "FulfillmentContext",
    "HttpDialogueBackend",
    "IntentEntry",
    "Mode",
    "OrchestrationError",
    "OrchestrationLibrary",
    "OutOfScopeIntent",
    "ReferenceBackend",
    "Session",
    "Stage",
    "Trajectory",
    "UnknownDomain",
    "describe_services",
    "execute",
    "make_backend",
    "match_intent",
    "read_meta",
    "run_session",
]
