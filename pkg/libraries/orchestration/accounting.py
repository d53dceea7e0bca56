"""
Token accounting without a model tokenizer.

A token is a whitespace-separated word. Every agent turn is charged its
context (instructions, workflow text and tool schemas in view) plus the
dialogue so far as input, and what it emits as output. Emitted text then
joins the running dialogue, as do the client's replies.
"""

import json
import threading
from typing import Any, Dict, Optional, Sequence, Tuple

from libraries.tools import ToolSet
from libraries.workflow import Workflow, token_count

from .events import AUTHENTICATOR, FULFILLMENT, ORCHESTRATOR, PERSONALIZER, REACT

INSTRUCTIONS = {
    ORCHESTRATOR: (
        "You are the orchestrator of a customer service session. Greet the client, "
        "identify the intent of their request from the list of supported intents and "
        "always call intent_identified with the intent and its domain before handing "
        "over. If the request is outside the supported services, politely explain "
        "which services you can help with."
    ),
    AUTHENTICATOR: (
        "You verify the identity of the client. Confirm the mobile number on file, "
        "call send_verification_text, ask the client to read back the code and check "
        "it with code_verifier. Allow up to two more attempts after a wrong code, "
        "then escalate. Never reveal the expected code."
    ),
    FULFILLMENT: (
        "You complete the client's request by following the workflow below step by "
        "step. Only call the tools listed, fill their parameters from the client "
        "record and the client's answers, follow the branch that matches each tool "
        "outcome or answer, and close the case with complete_case."
    ),
    PERSONALIZER: (
        "You tailor the workflow to one client. Drop the branches their attributes "
        "rule out, replace information lookups with what they returned, keep every "
        "branch that depends on a tool outcome or a client answer, and list the "
        "tools the tailored workflow still needs."
    ),
    REACT: (
        "You are a single customer service agent. Think step by step before every "
        "action, writing a short thought that the client never sees. Identify the "
        "intent, verify the client's identity, then follow the workflow for the "
        "intent, calling only the listed tools, and close the case with complete_case."
    ),
}


def count_tokens(text: Optional[str]) -> int:
    return len(text.split()) if text else 0


def tool_call_text(tool: str, params: Dict[str, Any]) -> str:
    return json.dumps({"name": tool, "args": params}, sort_keys=True)


def intent_registry_text(entries: Sequence[Any]) -> str:
    return " ".join(f"{entry.name}: {', '.join(entry.aliases)}." for entry in entries)


def context_tokens(
    agent: str,
    workflow: Optional[Workflow] = None,
    toolsets: Sequence[ToolSet] = (),
    extra_text: str = "",
) -> int:
    """Input tokens an agent carries on every turn before any dialogue."""
    total = count_tokens(INSTRUCTIONS[agent]) + count_tokens(extra_text)
    if workflow is not None:
        total += token_count(workflow)
    return total + sum(toolset.schema_tokens() for toolset in toolsets)


class TokenLedger:
    """Running dialogue length shared by the conversational agents of a session."""

    def __init__(self):
        self.dialogue = 0
        self._lock = threading.Lock()

    def charge(self, context: int, text: str) -> Tuple[int, int]:
        """(tokens_in, tokens_out) for a turn that emits ``text``."""
        with self._lock:
            tokens_in = context + self.dialogue
            tokens_out = count_tokens(text)
            self.dialogue += tokens_out
            return tokens_in, tokens_out

    def hear(self, text: str) -> None:
        with self._lock:
            self.dialogue += count_tokens(text)
