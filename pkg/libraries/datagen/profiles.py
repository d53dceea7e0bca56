"""
Synthetic user profiles.

Profiles are drawn from an intent schema with one seeded ``random.Random``
and one seeded Faker instance, so the same (schema, n, seed, utterances)
always yields the same profiles. The JSON shape keeps flat account
attributes next to the authenticator, contact and user-provided blocks.
"""

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence, Union

import jsonschema
from faker import Faker
from robot.api import logger

from libraries.workflow import assign

from .errors import DatagenError, SchemaIncomplete
from .schema import USER_INFO, IntentSchema

CUSTOMER_ID_RANGE = (10**7, 10**8)
AUTH_CODE_RANGE = (10**5, 10**6)
PHONE_RANGE = (2 * 10**9, 10**10)

_RESERVED = frozenset(
    {
        "agent_sequence",
        "customer_id",
        "intent",
        "domain",
        "authenticator_api",
        "contact_info",
        USER_INFO,
    }
)

PROFILE_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": [
            "customer_id",
            "intent",
            "domain",
            "authenticator_api",
            "contact_info",
            USER_INFO,
        ],
        "properties": {
            "customer_id": {"type": "integer", "minimum": 1},
            "intent": {"type": "string"},
            "domain": {"type": "string"},
            "authenticator_api": {
                "type": "object",
                "required": ["authenticator_code"],
                "properties": {"authenticator_code": {"type": "integer"}},
            },
            "contact_info": {
                "type": "object",
                "required": ["mobile_phone_number"],
                "properties": {"mobile_phone_number": {"type": "integer"}},
            },
            USER_INFO: {
                "type": "object",
                "required": ["first_utterance"],
                "properties": {"first_utterance": {"type": "string"}},
            },
        },
    },
}


@dataclass(frozen=True)
class UserProfile:
    customer_id: int
    intent: str
    domain: str
    attributes: Dict[str, Any] = field(default_factory=dict)
    user_provided_info: Dict[str, Any] = field(default_factory=dict)
    authenticator_code: int = 0
    mobile_phone_number: int = 0

    @property
    def first_utterance(self) -> str:
        return self.user_provided_info.get("first_utterance", "")

    def to_record(self) -> Dict[str, Any]:
        """What the back-office knows: the record info tools and attribute tests read."""
        return {
            "customer_id": self.customer_id,
            **self.attributes,
            "authenticator_api": {"authenticator_code": self.authenticator_code},
            "contact_info": {"mobile_phone_number": self.mobile_phone_number},
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "customer_id": self.customer_id,
            "intent": self.intent,
            "domain": self.domain,
            **self.attributes,
            "authenticator_api": {"authenticator_code": self.authenticator_code},
            "contact_info": {"mobile_phone_number": self.mobile_phone_number},
            USER_INFO: self.user_provided_info,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "UserProfile":
        return cls(
            customer_id=data["customer_id"],
            intent=data["intent"],
            domain=data["domain"],
            attributes={k: v for k, v in data.items() if k not in _RESERVED},
            user_provided_info=dict(data[USER_INFO]),
            authenticator_code=data["authenticator_api"]["authenticator_code"],
            mobile_phone_number=data["contact_info"]["mobile_phone_number"],
        )


def _customer_id(rng: random.Random, used: set) -> int:
    while True:
        candidate = rng.randrange(*CUSTOMER_ID_RANGE)
        if candidate not in used:
            used.add(candidate)
            return candidate


def generate_profiles(
    schema: IntentSchema, n: int, seed: int, utterances: Sequence[str]
) -> List[UserProfile]:
    """
    Draw ``n`` profiles for one intent.

    Args:
        schema: Intent schema declaring every field and its distribution
        n: Number of profiles, at least 1
        seed: Seed for both the value generator and Faker
        utterances: First-utterance pool to sample from

    Returns:
        List of UserProfile with unique customer ids

    Raises:
        ValueError: n < 1
        SchemaIncomplete: Empty utterance pool
    """
    if n < 1:
        raise ValueError(f"Number of profiles must be at least 1, got {n}")
    if not utterances:
        raise SchemaIncomplete(schema.intent, ["first_utterance"])

    rng = random.Random(seed)
    fake = Faker("en_US")
    fake.seed_instance(seed)

    used: set = set()
    profiles = []
    for _ in range(n):
        customer_id = _customer_id(rng, used)
        drawn: Dict[str, Any] = {}
        for spec in schema.fields:
            assign(drawn, spec.path, spec.draw(rng, fake))
        info = drawn.pop(USER_INFO, {})
        code = rng.randrange(*AUTH_CODE_RANGE)
        phone = rng.randrange(*PHONE_RANGE)
        info.setdefault("authenticator_code", code)
        info.setdefault("mobile_phone_number", phone)
        info["first_utterance"] = rng.choice(list(utterances))
        profiles.append(
            UserProfile(customer_id, schema.intent, schema.domain, drawn, info, code, phone)
        )

    logger.info(f"Generated {n} profiles for {schema.intent} (seed {seed})")
    return profiles


def write_profiles(profiles: Sequence[UserProfile], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump([p.to_dict() for p in profiles], f, indent=2)
        f.write("\n")
    return path


def load_profiles(path: Union[str, Path]) -> List[UserProfile]:
    """
    Read a profile array written by ``write_profiles``.

    Raises:
        DatagenError: Unreadable file or a profile missing a required block
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, ValueError) as e:
        raise DatagenError(f"Cannot read profiles {path}: {e}") from e
    try:
        jsonschema.validate(document, PROFILE_SCHEMA)
    except jsonschema.ValidationError as e:
        raise DatagenError(f"Invalid profile file {path}: {e.message}") from e
    return [UserProfile.from_dict(entry) for entry in document]
