"""
Robot Framework library for running sessions end to end.
"""

import json
from dataclasses import replace
from typing import Any, Dict, List, Optional

from robot.api import logger
from robot.api.deco import keyword

from libraries.datagen import ScriptedClient, UserProfile
from libraries.tools import LatencySpec

from .catalog import Catalog
from .engine import Engine, EngineConfig
from .events import Mode, Trajectory
from .intents import match_intent


class OrchestrationLibrary:
    """
    Robot Framework library around the session engine.

    The catalog is loaded once; the last trajectory is kept so assertion
    keywords can refer to it.
    """

    ROBOT_LIBRARY_SCOPE = "GLOBAL"
    ROBOT_LIBRARY_VERSION = "1.0.0"

    def __init__(self, index: Optional[str] = None):
        self.index = index
        self._catalog: Optional[Catalog] = None
        self.config = EngineConfig()
        self.trajectory: Optional[Trajectory] = None

    @property
    def catalog(self) -> Catalog:
        if self._catalog is None:
            self._catalog = Catalog.load(self.index)
        return self._catalog

    def _engine(self) -> Engine:
        return Engine(self.catalog, self.config)

    def _trajectory(self) -> Trajectory:
        if self.trajectory is None:
            raise AssertionError("No session has been run yet")
        return self.trajectory

    @staticmethod
    def _profile(profile: Any) -> UserProfile:
        if isinstance(profile, UserProfile):
            return profile
        if isinstance(profile, str):
            profile = json.loads(profile)
        return UserProfile.from_dict(profile)

    @keyword("Reset Engine Config")
    def reset_engine_config(self):
        """Back to the default engine configuration: random latencies, parallel lanes."""
        self.config = EngineConfig()

    @keyword("Set Tool Latency")
    def set_tool_latency(self, tool: str, ms: int):
        """
        Give a tool a fixed latency for the following sessions.

        Example:
            | Set Tool Latency | code_verifier | 250 |
        """
        overrides = dict(self.config.latency_overrides)
        overrides[tool] = LatencySpec.fixed(int(ms))
        self.config = replace(self.config, latency_overrides=overrides)

    @keyword("Use Deterministic Tools")
    def use_deterministic_tools(self, enabled: bool = True):
        self.config = replace(self.config, deterministic_tools=bool(enabled))

    @keyword("Set Parallel Personalization")
    def set_parallel_personalization(self, enabled: bool):
        self.config = replace(self.config, parallel_personalization=bool(enabled))

    @keyword("Run Session")
    def run_session(self, profile: Any, mode: str = "warpp", seed: int = 0, *auth_codes: int) -> Trajectory:
        """
        Run one session and remember its trajectory.

        Args:
            profile: UserProfile, profile dictionary or JSON string
            mode: react, noper or warpp
            seed: Session seed
            auth_codes: Codes the client reads back before the right one

        Example:
            | ${trajectory}= | Run Session | ${profile} | warpp | 7 |
        """
        profile = self._profile(profile)
        engine = self._engine()
        client = None
        if auth_codes:
            policy = self.catalog.intent(profile.intent, profile.domain).schema.reply_policy
            client = ScriptedClient(profile, policy, [int(code) for code in auth_codes])
        self.trajectory = engine.run_session(profile, Mode.parse(mode), int(seed), client)
        logger.info(
            f"Session {self.trajectory.session_id} {self.trajectory.status}: "
            f"{len(self.trajectory.events)} events, {self.trajectory.tokens} tokens"
        )
        return self.trajectory

    @keyword("Utterance Should Map To Intent")
    def utterance_should_map_to_intent(self, utterance: str, domain: str, expected: str):
        actual = match_intent(utterance, self.catalog.intents(domain))
        if actual != expected:
            raise AssertionError(f"{utterance!r} maps to {actual}, expected {expected}")

    @keyword("Utterance Should Be Out Of Scope")
    def utterance_should_be_out_of_scope(self, utterance: str, domain: str):
        actual = match_intent(utterance, self.catalog.intents(domain))
        if actual is not None:
            raise AssertionError(f"{utterance!r} unexpectedly maps to {actual}")

    @keyword("Session Status Should Be")
    def session_status_should_be(self, expected: str):
        actual = self._trajectory().status
        if actual != expected:
            raise AssertionError(f"Session status is {actual}, expected {expected}")

    @keyword("Get Tool Sequence")
    def get_tool_sequence(self, scope: str = "overall") -> List[str]:
        return self._trajectory().tool_names(scope)

    @keyword("Fulfillment Tools Should Be")
    def fulfillment_tools_should_be(self, *expected: str):
        """
        Example:
            | Fulfillment Tools Should Be | validate_address | update_address | complete_case |
        """
        actual = self._trajectory().tool_names("fulfillment")
        if list(expected) != actual:
            raise AssertionError(f"Fulfillment tools {actual}, expected {list(expected)}")

    @keyword("Trajectory Should Not Contain Tool")
    def trajectory_should_not_contain_tool(self, tool: str, scope: str = "overall"):
        if tool in self._trajectory().tool_names(scope):
            raise AssertionError(f"Trajectory calls {tool} during {scope}")

    @keyword("Pre Fulfillment Time Should Be")
    def pre_fulfillment_time_should_be(self, expected_ms: int, tolerance_ms: int = 0):
        actual = self._trajectory().pre_fulfillment_ms
        if abs(actual - int(expected_ms)) > int(tolerance_ms):
            raise AssertionError(f"Pre-fulfillment took {actual} ms, expected {expected_ms}")

    @keyword("Get Token Usage")
    def get_token_usage(self) -> int:
        return self._trajectory().tokens

    @keyword("Get Trajectory Summary")
    def get_trajectory_summary(self) -> Dict[str, Any]:
        return self._trajectory().header()

    @keyword("Save Trajectory")
    def save_trajectory(self, path: str) -> str:
        """
        Write the last trajectory as JSONL.

        Example:
            | Save Trajectory | ${OUTPUT_DIR}/session.jsonl |
        """
        written = self._trajectory().write(path)
        logger.info(f"Trajectory saved to {written}")
        return str(written)
