"""Per-session state owned by a single task."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from robot.api import logger

from libraries.datagen import ScriptedClient, UserProfile
from libraries.personalizer import TrimResult

from .accounting import TokenLedger
from .catalog import IntentEntry
from .errors import BarrierViolation, OrchestrationError
from .events import Mode, Stage, Trajectory


@dataclass
class Session:
    id: str
    profile: UserProfile
    mode: Mode
    seed: int
    domain: str
    client: ScriptedClient
    clock: Any
    trajectory: Trajectory
    record: Dict[str, Any]
    ledger: TokenLedger = field(default_factory=TokenLedger)
    contexts: Dict[str, int] = field(default_factory=dict)
    stage: Stage = Stage.ORCHESTRATION
    pending_utterance: Optional[str] = None
    intent: Optional[str] = None
    entry: Optional[IntentEntry] = None
    trim: Optional[TrimResult] = None
    authenticated: bool = False
    fell_back: bool = False
    barrier_at: Optional[int] = None

    def advance(self, stage: Stage) -> None:
        """
        Move to a later stage.

        Raises:
            OrchestrationError: Moving backwards or staying put
            BarrierViolation: Entering fulfillment before authentication
                succeeded, or in Warpp mode before personalization finished
        """
        if stage.order <= self.stage.order:
            raise OrchestrationError(f"Cannot move from {self.stage.value} to {stage.value}")
        if stage is Stage.FULFILLMENT:
            if not self.authenticated:
                raise BarrierViolation("Fulfillment before authentication succeeded")
            if self.mode is Mode.WARPP and self.trim is None and not self.fell_back:
                raise BarrierViolation("Fulfillment before personalization finished")
        logger.debug(f"Session {self.id}: {self.stage.value} -> {stage.value}")
        self.stage = stage

    def close(self, status: str) -> Trajectory:
        self.stage = Stage.CLOSED
        self.trajectory.status = status
        self.trajectory.elapsed_ms = self.clock.elapsed()
        return self.trajectory
