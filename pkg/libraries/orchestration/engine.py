"""
Session engine.

Runs a session through its stages: the orchestrator identifies the intent,
authentication and (in Warpp mode) personalization run as two lanes joined
at a barrier, then fulfillment walks the trimmed or full workflow. React mode
runs the same work as one thinking agent with the full workflow in view.
"""

import uuid
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, Mapping, NamedTuple, Optional, Union

from robot.api import logger

from libraries.datagen import ScriptedClient, UserProfile
from libraries.personalizer import ClientData, PersonalizerError, TrimResult, trim
from libraries.tools import LatencySpec, ToolError, ToolSet, filter_tools, make_clock
from libraries.workflow import TERMINAL_TOOL, WorkflowError, token_count

from .accounting import context_tokens, intent_registry_text
from .backend import DialogueBackend, make_backend
from .catalog import Catalog, IntentEntry
from .errors import AuthFailed, OrchestrationError, OutOfScopeIntent
from .events import (
    AUTHENTICATOR,
    CLIENT,
    FULFILLMENT,
    ORCHESTRATOR,
    PERSONALIZER,
    REACT,
    EventKind,
    Mode,
    Stage,
    Trajectory,
)
from .executor import FulfillmentContext
from .intents import describe_services, match_intent
from .lanes import Lane, LaneRecorder, ToolRunner, merge_lanes
from .session import Session

SESSION_NAMESPACE = uuid.uuid5(uuid.NAMESPACE_URL, "warpp/session")
AUTH_TOOLS = ("send_verification_text", "code_verifier")
INTENT_TOOL = "intent_identified"


class AuthResult(NamedTuple):
    verified: bool
    attempts: int
    finished_at: int


@dataclass(frozen=True)
class EngineConfig:
    max_auth_attempts: int = 3
    parallel_personalization: bool = True
    barrier_epsilon_ms: int = 0
    turn_latency_ms: int = 0
    max_branch_depth: int = 8
    terminal_tool: str = TERMINAL_TOOL
    clock: str = "virtual"
    deterministic_tools: bool = False
    latency_overrides: Mapping[str, LatencySpec] = field(default_factory=dict)
    lane_timeout_s: Optional[float] = 300.0
    backend: str = "reference"
    backend_options: Mapping[str, Any] = field(default_factory=dict)
    trace_events: bool = True

    @classmethod
    def from_config(cls, config, **overrides) -> "EngineConfig":
        """Read the ``orchestration``, ``workflow`` and ``tools`` sections of a Config."""
        values: Dict[str, Any] = {
            "max_auth_attempts": config.get("orchestration.max_auth_attempts", 3),
            "parallel_personalization": config.get("orchestration.parallel_personalization", True),
            "barrier_epsilon_ms": config.get("orchestration.barrier_epsilon_ms", 0),
            "turn_latency_ms": config.get("orchestration.turn_latency_ms", 0),
            "max_branch_depth": config.get("workflow.max_branch_depth", 8),
            "terminal_tool": config.get("workflow.terminal_tool", TERMINAL_TOOL),
            "clock": config.get("tools.clock", "virtual"),
            "deterministic_tools": config.get("tools.deterministic", False),
            "backend": config.get("orchestration.backend", "reference"),
            "trace_events": config.get("logging.trace_events", True),
        }
        if values["backend"] == "http":
            values["backend_options"] = {
                "base_url": config.get("orchestration.backend_url"),
                "timeout": config.get("orchestration.backend_timeout", 30),
                "retry_attempts": config.get("orchestration.retry_attempts", 3),
            }
        values.update(overrides)
        return cls(**values)


class Engine:
    """
    Runs sessions against a catalog of domains and intents.

    An engine holds no per-session state, so one engine can drive any number
    of sessions concurrently.
    """

    def __init__(
        self,
        catalog: Optional[Catalog] = None,
        config: Optional[EngineConfig] = None,
        backend: Optional[DialogueBackend] = None,
    ):
        self.config = config or EngineConfig()
        catalog = catalog or Catalog.load(
            max_depth=self.config.max_branch_depth, terminal_tool=self.config.terminal_tool
        )
        if self.config.deterministic_tools:
            catalog = catalog.with_toolsets(ToolSet.deterministic)
        if self.config.latency_overrides:
            catalog = catalog.with_toolsets(self._override_latency)
        self.catalog = catalog
        self.backend = backend or make_backend(self.config.backend, **self.config.backend_options)

    def _override_latency(self, toolset: ToolSet) -> ToolSet:
        for name, latency in self.config.latency_overrides.items():
            if name in toolset:
                toolset = toolset.with_latency(name, latency)
        return toolset

    def _recorder(
        self, session: Session, lane: str, stage: Stage, clock=None, think: Optional[bool] = None
    ) -> LaneRecorder:
        return LaneRecorder(
            lane,
            clock if clock is not None else session.clock,
            stage.value,
            session.ledger,
            session.contexts,
            self.config.turn_latency_ms,
            session.mode is Mode.REACT if think is None else think,
            self.config.trace_events,
        )

    # Stage 1

    def start_session(
        self,
        profile: UserProfile,
        mode: Union[Mode, str],
        seed: int = 0,
        client: Optional[ScriptedClient] = None,
    ) -> Session:
        """
        Open a session for a profile with its first utterance queued.

        Raises:
            UnknownDomain: The profile's domain is not registered
            OrchestrationError: The profile's intent is not registered in its domain
        """
        mode = Mode.parse(mode)
        entries = self.catalog.domain(profile.domain)
        if profile.intent not in entries:
            raise OrchestrationError(
                f"Intent {profile.intent} is not registered for {profile.domain}"
            )
        reply_policy = entries[profile.intent].schema.reply_policy
        client = client or ScriptedClient(profile, reply_policy)
        session_id = str(uuid.uuid5(SESSION_NAMESPACE, f"{profile.customer_id}:{mode.value}:{seed}"))

        session = Session(
            id=session_id,
            profile=profile,
            mode=mode,
            seed=seed,
            domain=profile.domain,
            client=client,
            clock=make_clock(self.config.clock),
            trajectory=Trajectory(session_id, profile.customer_id, mode.value, seed),
            record=profile.to_record(),
            pending_utterance=client.opening().text,
        )
        registry = intent_registry_text(list(entries.values()))
        system = self.catalog.system_tools
        if mode is Mode.REACT:
            session.contexts[REACT] = context_tokens(REACT, toolsets=[system], extra_text=registry)
        else:
            session.contexts[ORCHESTRATOR] = context_tokens(
                ORCHESTRATOR, toolsets=[filter_tools(system, [INTENT_TOOL])], extra_text=registry
            )
            session.contexts[AUTHENTICATOR] = context_tokens(
                AUTHENTICATOR, toolsets=[filter_tools(system, AUTH_TOOLS)]
            )
        logger.info(f"Started session {session_id} ({mode.label}) for customer {profile.customer_id}")
        return session

    def identify_intent(self, session: Session, utterance: Optional[str] = None) -> str:
        """
        Match the client's utterance against the domain's intent registry.

        Raises:
            OutOfScopeIntent: Nothing matches; the session is closed politely
        """
        if session.stage is not Stage.ORCHESTRATION:
            raise OrchestrationError(f"Intent is identified during orchestration, not {session.stage.value}")
        utterance = session.pending_utterance if utterance is None else utterance
        session.pending_utterance = None
        agent = REACT if session.mode is Mode.REACT else ORCHESTRATOR
        recorder = self._recorder(session, "main", Stage.ORCHESTRATION)

        recorder.hear(utterance)
        recorder.emit(EventKind.AGENT_TRANSITION, agent, source=CLIENT)
        entries = self.catalog.intents(session.domain)
        intent = match_intent(utterance, entries)
        if intent is None:
            recorder.say(agent, describe_services(entries))
            session.trajectory.extend(recorder.events)
            session.close("out_of_scope")
            logger.info(f"Session {session.id}: no {session.domain} intent matches {utterance!r}")
            raise OutOfScopeIntent(utterance, session.domain)

        entry = self.catalog.intent(intent, session.domain)
        session.intent = intent
        session.entry = entry
        session.trajectory.intent = intent
        runner = ToolRunner(self.catalog.system_tools, session.record, session.seed, session.clock)
        params = {"intent": intent, "domain": session.domain}
        outcome = runner.invoke(INTENT_TOOL, params)
        recorder.act(EventKind.TOOL_INVOCATION, agent, tool=INTENT_TOOL, params=params, outcome=outcome.outcome)
        if session.mode is Mode.REACT:
            session.contexts[REACT] += token_count(entry.workflow) + entry.toolset.schema_tokens()

        session.trajectory.extend(recorder.events)
        session.advance(Stage.AUTH_AND_PERSONALIZE)
        logger.info(f"Session {session.id}: intent {intent}")
        return intent

    # Stage 2

    def run_authenticator(self, session: Session, recorder: Optional[LaneRecorder] = None) -> AuthResult:
        """
        Verify the client with a text message code, allowing retries.

        With no recorder the events go to the main lane of the session.
        """
        if session.intent is None:
            raise OrchestrationError("Authentication needs an identified intent")
        own_recorder = recorder is None
        if own_recorder:
            recorder = self._recorder(session, "main", Stage.AUTH_AND_PERSONALIZE)
        agent = REACT if session.mode is Mode.REACT else AUTHENTICATOR
        runner = ToolRunner(self.catalog.system_tools, session.record, session.seed, recorder.clock)
        client = session.client
        customer_id = session.profile.customer_id

        recorder.say(agent, "To verify your identity, please confirm the mobile number on your account.")
        phone = client.phone_number()
        recorder.hear(phone.text)
        params = {"customer_id": customer_id, "mobile_phone_number": phone.value}
        sent = runner.invoke("send_verification_text", params)
        recorder.act(
            EventKind.TOOL_INVOCATION, agent, tool="send_verification_text", params=params, outcome=sent.outcome
        )

        result = None
        for attempt in range(1, self.config.max_auth_attempts + 1):
            if attempt == 1:
                recorder.say(agent, "I have sent you a verification code. Please read it back to me.")
            else:
                recorder.say(agent, "That code did not match. Please read the code again.")
            code = client.verification_code()
            recorder.hear(code.text)
            params = {"customer_id": customer_id, "code": code.value}
            runner.invoke("code_verifier", params)
            verified = code.value == session.profile.authenticator_code
            recorder.act(
                EventKind.TOOL_INVOCATION,
                agent,
                tool="code_verifier",
                params=params,
                outcome="verified" if verified else "rejected",
            )
            if verified:
                recorder.say(agent, "Thank you, your identity is verified.")
                result = AuthResult(True, attempt, recorder.clock.now())
                break

        if result is None:
            recorder.say(agent, "I could not verify your identity, so I am passing you to a specialist.")
            logger.warn(
                f"Session {session.id}: authentication failed after {self.config.max_auth_attempts} attempts"
            )
            result = AuthResult(False, self.config.max_auth_attempts, recorder.clock.now())
        if own_recorder:
            session.trajectory.extend(recorder.events)
        return result

    def run_personalizer_async(self, session: Session, clock=None, background: bool = True) -> Lane:
        """
        Start the personalizer lane: run the info tools, then trim the workflow.

        The lane works on immutable copies of what it needs from the session.
        Its slot holds the TrimResult, or None after a recorded fallback.
        """
        if session.mode is not Mode.WARPP:
            raise OrchestrationError("Personalization runs in Warpp mode only")
        if session.entry is None:
            raise OrchestrationError("Personalization needs an identified intent")
        recorder = LaneRecorder(
            "personalizer",
            clock if clock is not None else session.clock.fork(),
            Stage.AUTH_AND_PERSONALIZE.value,
            trace=self.config.trace_events,
        )
        work = partial(
            self._personalize, session.entry, session.profile.customer_id, dict(session.record), session.seed
        )
        lane: Lane = Lane(recorder)
        return lane.start(work) if background else lane.run_inline(work)

    def _personalize(
        self,
        entry: IntentEntry,
        customer_id: int,
        record: Mapping[str, Any],
        seed: int,
        recorder: LaneRecorder,
    ) -> Optional[TrimResult]:
        runner = ToolRunner(entry.toolset, record, seed, recorder.clock)
        try:
            results = {}
            for spec in entry.toolset.info_tools:
                params = {param.name: record.get(param.name) for param in spec.params}
                outcome = runner.invoke(spec.name, params)
                recorder.act(
                    EventKind.TOOL_INVOCATION, PERSONALIZER, tool=spec.name, params=params, outcome=outcome.outcome
                )
                results[spec.name] = outcome
            client = ClientData.from_info_results(customer_id, results, entry.schema.nullable)
            return trim(
                entry.workflow,
                client,
                entry.toolset,
                terminal_tool=self.config.terminal_tool,
                max_depth=self.config.max_branch_depth,
            )
        except (PersonalizerError, WorkflowError, ToolError) as e:
            recorder.emit(
                EventKind.FALLBACK, PERSONALIZER, text=f"Personalization failed, using the full workflow: {e}"
            )
            logger.warn(f"Personalizer fallback for customer {customer_id} on {entry.name}: {e}")
            return None

    def authenticate_and_personalize(self, session: Session) -> None:
        """
        Run authentication and personalization, then release the barrier.

        Raises:
            AuthFailed: The client could not be verified; the session is closed
        """
        if session.stage is not Stage.AUTH_AND_PERSONALIZE:
            raise OrchestrationError(f"Stage two cannot start from {session.stage.value}")
        warpp = session.mode is Mode.WARPP
        main = self._recorder(session, "main", Stage.AUTH_AND_PERSONALIZE)
        main.emit(EventKind.AGENT_TRANSITION, AUTHENTICATOR, source=ORCHESTRATOR)
        if warpp:
            main.emit(EventKind.AGENT_TRANSITION, PERSONALIZER, source=ORCHESTRATOR)
        session.trajectory.extend(main.events)
        started = session.clock.now()

        auth: Lane = Lane(self._recorder(session, "auth", Stage.AUTH_AND_PERSONALIZE, clock=session.clock.fork()))
        authenticate = partial(self.run_authenticator, session)
        lanes = [auth]
        if self.config.parallel_personalization:
            auth.start(authenticate)
            if warpp:
                lanes.append(self.run_personalizer_async(session))
        else:
            auth.run_inline(authenticate)
            if warpp:
                lanes.append(self.run_personalizer_async(session, clock=auth.clock.fork(), background=False))

        timeout = self.config.lane_timeout_s
        result: AuthResult = auth.join(timeout)
        trimmed = lanes[1].join(timeout) if warpp else None
        session.trajectory.extend(merge_lanes(lanes))

        barrier_at = max(lane.clock.now() for lane in lanes) + self.config.barrier_epsilon_ms
        session.clock.advance_to(barrier_at)
        session.barrier_at = barrier_at
        session.trajectory.pre_fulfillment_ms = barrier_at - started
        logger.info(f"Session {session.id}: barrier released at {barrier_at} ms")

        if not result.verified:
            session.close("auth_failed")
            raise AuthFailed(result.attempts)
        session.authenticated = True

        after = self._recorder(session, "main", Stage.AUTH_AND_PERSONALIZE)
        if warpp:
            if trimmed is None:
                session.fell_back = True
            else:
                session.trim = trimmed
                session.trajectory.personalizer_tokens = self._personalizer_tokens(session.entry, trimmed)
                after.emit(
                    EventKind.HANDOFF,
                    FULFILLMENT,
                    source=PERSONALIZER,
                    text=(
                        f"Personalized workflow with {trimmed.workflow.step_count} steps "
                        f"and tools {', '.join(sorted(trimmed.tools))}"
                    ),
                )
        after.emit(EventKind.AGENT_TRANSITION, FULFILLMENT, source=AUTHENTICATOR)
        session.trajectory.extend(after.events)
        session.advance(Stage.FULFILLMENT)

    @staticmethod
    def _personalizer_tokens(entry: IntentEntry, result: TrimResult) -> int:
        tokens_in = context_tokens(PERSONALIZER, entry.workflow, [entry.toolset])
        tokens_out = token_count(result.workflow) + len(result.tools)
        return tokens_in + tokens_out

    # Stage 3

    def fulfill(self, session: Session, backend: Optional[DialogueBackend] = None) -> Trajectory:
        """
        Walk the trimmed (Warpp) or full workflow to the terminal tool.

        Raises:
            BarrierViolation: Fulfillment stage not reached
            ExecutorStuck: The workflow cannot be followed; the session is closed with an error
        """
        if session.stage is not Stage.FULFILLMENT:
            session.advance(Stage.FULFILLMENT)
        entry = session.entry
        if session.trim is not None:
            workflow, toolset = session.trim.workflow, session.trim.toolset
        else:
            workflow, toolset = entry.workflow, entry.toolset
        agent = REACT if session.mode is Mode.REACT else FULFILLMENT
        if agent == FULFILLMENT:
            session.contexts[FULFILLMENT] = context_tokens(FULFILLMENT, workflow, [toolset])

        recorder = self._recorder(session, "main", Stage.FULFILLMENT)
        ctx = FulfillmentContext(
            session_id=session.id,
            workflow=workflow,
            toolset=toolset,
            runner=ToolRunner(toolset, session.record, session.seed, session.clock),
            recorder=recorder,
            client=session.client,
            record=session.record,
            agent=agent,
            terminal_tool=self.config.terminal_tool,
        )
        started = session.clock.now()
        try:
            (backend or self.backend).fulfill(ctx)
        except Exception:
            session.trajectory.extend(recorder.events)
            session.trajectory.fulfillment_ms = session.clock.now() - started
            session.close("error")
            raise
        session.trajectory.extend(recorder.events)
        session.trajectory.fulfillment_ms = session.clock.now() - started
        logger.info(f"Session {session.id}: completed in {session.clock.elapsed()} ms")
        return session.close("completed")

    def run_react(self, session: Session, backend: Optional[DialogueBackend] = None) -> Trajectory:
        """Single thinking agent: intent, authentication and fulfillment in one loop."""
        if session.mode is not Mode.REACT:
            raise OrchestrationError(f"run_react needs React mode, got {session.mode.label}")
        if session.stage is Stage.ORCHESTRATION:
            self.identify_intent(session)
        started = session.clock.now()
        result = self.run_authenticator(session)
        session.trajectory.pre_fulfillment_ms = session.clock.now() - started
        if not result.verified:
            session.close("auth_failed")
            raise AuthFailed(result.attempts)
        session.authenticated = True
        session.advance(Stage.FULFILLMENT)
        return self.fulfill(session, backend)

    def run_session(
        self,
        profile: UserProfile,
        mode: Union[Mode, str],
        seed: int = 0,
        client: Optional[ScriptedClient] = None,
        backend: Optional[DialogueBackend] = None,
    ) -> Trajectory:
        """
        Run a whole session and return its trajectory.

        Out-of-scope and failed-authentication sessions come back closed with
        their status; ExecutorStuck propagates.
        """
        session = self.start_session(profile, mode, seed, client)
        try:
            if session.mode is Mode.REACT:
                return self.run_react(session, backend)
            self.identify_intent(session)
            self.authenticate_and_personalize(session)
            return self.fulfill(session, backend)
        except (OutOfScopeIntent, AuthFailed) as e:
            logger.info(f"Session {session.id} closed early: {e}")
            return session.trajectory


def run_session(
    profile: UserProfile,
    mode: Union[Mode, str],
    seed: int = 0,
    engine: Optional[Engine] = None,
    client: Optional[ScriptedClient] = None,
) -> Trajectory:
    return (engine or Engine()).run_session(profile, mode, seed, client)
