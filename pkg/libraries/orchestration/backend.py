"""
Dialogue backends for the fulfillment stage.

The reference backend runs the deterministic executor. The HTTP backend
hands every turn to an external agent: it posts the session id, the
role-tagged message history, the tool schemas in view and the workflow text,
and gets back either a message (optionally naming the prompt key it asks
for) or a tool call. Tool calls still run through the session's tool runner.
"""

from typing import Any, Dict, List, Optional, Protocol

import jsonschema
import requests
from requests.adapters import HTTPAdapter
from robot.api import logger
from urllib3.util.retry import Retry

from libraries.tools import ToolError
from libraries.workflow import serialize_workflow

from .errors import ExecutorStuck, OrchestrationError
from .events import EventKind
from .executor import FulfillmentContext, execute

RESPONSE_SCHEMA = {
    "type": "object",
    "oneOf": [
        {
            "required": ["message"],
            "properties": {
                "message": {"type": "string"},
                "prompt_key": {"type": "string"},
            },
        },
        {
            "required": ["tool_call"],
            "properties": {
                "tool_call": {
                    "type": "object",
                    "required": ["name"],
                    "properties": {
                        "name": {"type": "string"},
                        "args": {"type": "object"},
                    },
                }
            },
        },
    ],
}


class DialogueBackend(Protocol):
    name: str

    def fulfill(self, ctx: FulfillmentContext) -> None:
        ...


class ReferenceBackend:
    name = "reference"

    def fulfill(self, ctx: FulfillmentContext) -> None:
        execute(ctx)


def build_request(ctx: FulfillmentContext, messages: List[Dict[str, Any]]) -> Dict[str, Any]:
    return {
        "session_id": ctx.session_id,
        "messages": messages,
        "tools": [spec.docstring() for spec in ctx.toolset.specs],
        "workflow": serialize_workflow(ctx.workflow),
    }


class HttpDialogueBackend:
    """External agent reached over HTTP, with retries on transient server errors."""

    name = "http"

    def __init__(
        self,
        base_url: str,
        timeout: int = 30,
        retry_attempts: int = 3,
        backoff_factor: float = 0.3,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = self._create_session_with_retry(retry_attempts, backoff_factor)

    def _create_session_with_retry(
        self,
        retry_attempts: int = 3,
        backoff_factor: float = 0.3,
        status_forcelist: tuple = (500, 502, 503, 504),
    ) -> requests.Session:
        session = requests.Session()
        retry_strategy = Retry(
            total=retry_attempts,
            backoff_factor=backoff_factor,
            status_forcelist=status_forcelist,
            allowed_methods=["POST"],
        )
        adapter = HTTPAdapter(max_retries=retry_strategy)
        session.mount("http://", adapter)
        session.mount("https://", adapter)
        return session

    def next_action(self, request: Dict[str, Any]) -> Dict[str, Any]:
        """
        Ask the external agent for its next move.

        Raises:
            OrchestrationError: Transport failure or a malformed response
        """
        url = f"{self.base_url}/next"
        try:
            response = self.session.post(url, json=request, timeout=self.timeout)
            response.raise_for_status()
            body = response.json()
        except (requests.RequestException, ValueError) as e:
            logger.error(f"Dialogue backend request failed: {e}")
            raise OrchestrationError(f"Dialogue backend at {url} failed: {e}") from e
        try:
            jsonschema.validate(body, RESPONSE_SCHEMA)
        except jsonschema.ValidationError as e:
            raise OrchestrationError(f"Malformed dialogue backend response: {e.message}") from e
        return body

    def fulfill(self, ctx: FulfillmentContext) -> None:
        messages: List[Dict[str, Any]] = []
        for _ in range(ctx.max_turns):
            action = self.next_action(build_request(ctx, messages))
            if "tool_call" in action:
                name = action["tool_call"]["name"]
                args = action["tool_call"].get("args", {})
                try:
                    outcome = ctx.runner.invoke(name, args)
                except ToolError as e:
                    raise ExecutorStuck("backend", str(e)) from e
                ctx.recorder.act(
                    EventKind.TOOL_INVOCATION, ctx.agent, tool=name, params=args, outcome=outcome.outcome
                )
                messages.append({"role": "tool", "name": name, "content": outcome.to_dict()})
                if name == ctx.terminal_tool:
                    ctx.recorder.hear(ctx.client.finish().text)
                    return
                continue

            ctx.recorder.say(ctx.agent, action["message"])
            messages.append({"role": "assistant", "content": action["message"]})
            key: Optional[str] = action.get("prompt_key")
            if key:
                reply = ctx.client.respond(key)
                ctx.recorder.hear(reply.text)
                messages.append({"role": "user", "content": reply.text})
        raise ExecutorStuck("backend", f"no {ctx.terminal_tool} after {ctx.max_turns} turns")

    def close(self) -> None:
        self.session.close()


def make_backend(kind: str = "reference", **options) -> DialogueBackend:
    if kind == "reference":
        return ReferenceBackend()
    if kind == "http":
        return HttpDialogueBackend(**options)
    raise ValueError(f"Unknown dialogue backend: {kind}")
