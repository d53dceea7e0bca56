"""
Scripted client.

Plays the customer's side of a session straight from a profile: the first
utterance, the phone number and code during authentication, and answers to
workflow prompts according to the intent's reply policy. Once the case is
closed every further question gets "exit".
"""

from typing import Any, List, Mapping, NamedTuple, Optional, Sequence

from libraries.workflow import MISSING, lookup

from .errors import UnknownPrompt
from .profiles import UserProfile
from .schema import REPLY_LITERALS

EXIT = "exit"
_ADDRESS_KEYS = ("street", "city", "state", "zip_code", "country")


class Reply(NamedTuple):
    text: str
    value: Any


def render_reply(value: Any) -> str:
    """How a customer would say a structured value out loud."""
    if isinstance(value, Mapping):
        if all(key in value for key in _ADDRESS_KEYS):
            return (
                f"{value['street']}, {value['city']}, "
                f"{value['state']} {value['zip_code']}, {value['country']}"
            )
        return ", ".join(f"{key.replace('_', ' ')} {item}" for key, item in value.items())
    if isinstance(value, (list, tuple)):
        return ", ".join(str(item) for item in value)
    return str(value)


class ScriptedClient:
    def __init__(
        self,
        profile: UserProfile,
        reply_policy: Optional[Mapping[str, str]] = None,
        auth_codes: Optional[Sequence[int]] = None,
    ):
        self.profile = profile
        self.reply_policy = dict(reply_policy or {})
        self._codes: List[int] = list(auth_codes or ())
        self.finished = False

    def opening(self) -> Reply:
        text = self.profile.first_utterance
        return Reply(text, text)

    def answer(self, key: str) -> Any:
        """
        Value the client gives for a prompt key.

        Raises:
            UnknownPrompt: Neither the reply policy nor the provided info has it
        """
        policy = self.reply_policy.get(key)
        if policy in REPLY_LITERALS:
            return policy
        if policy is None:
            value = lookup(self.profile.user_provided_info, key)
        else:
            value = lookup(self.profile.to_dict(), policy)
        if value is MISSING:
            raise UnknownPrompt(key)
        return value

    def respond(self, key: str) -> Reply:
        if self.finished:
            return Reply(EXIT, EXIT)
        value = self.answer(key)
        return Reply(render_reply(value), value)

    def phone_number(self) -> Reply:
        value = self.profile.user_provided_info.get(
            "mobile_phone_number", self.profile.mobile_phone_number
        )
        return Reply(str(value), value)

    def verification_code(self) -> Reply:
        """Scripted codes are read back first, then the code the profile holds."""
        if self._codes:
            value = self._codes.pop(0)
        else:
            value = self.profile.user_provided_info.get(
                "authenticator_code", self.profile.authenticator_code
            )
        return Reply(str(value), value)

    def finish(self) -> Reply:
        self.finished = True
        return Reply(EXIT, EXIT)
