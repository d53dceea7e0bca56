"""
Profile factory for generating synthetic customers and their scripted replies.
"""

from typing import Any, Dict, List, Optional

from robot.api import logger
from robot.api.deco import keyword

from .client import ScriptedClient
from .profiles import UserProfile, generate_profiles, load_profiles, write_profiles
from .schema import IntentSchema, load_schema
from .utterances import load_utterances


class ProfileFactory:
    """
    Robot Framework library for generating test customers.

    Provides keywords for drawing seeded profiles from an intent schema,
    saving and loading them, and checking the scripted client's replies.
    """

    ROBOT_LIBRARY_SCOPE = "GLOBAL"
    ROBOT_LIBRARY_VERSION = "1.0.0"

    def __init__(self):
        self.schema: Optional[IntentSchema] = None
        self.profiles: List[UserProfile] = []

    @keyword("Load Intent Schema")
    def load_intent_schema(self, path: str) -> IntentSchema:
        """
        Load an intent schema and make it current.

        Example:
            | ${schema}= | Load Intent Schema | fixtures/schemas/update_address.json |
        """
        self.schema = load_schema(path)
        logger.info(f"Loaded schema for {self.schema.intent} with {len(self.schema.fields)} fields")
        return self.schema

    @keyword("Generate Profiles")
    def generate(
        self, schema: str, utterances: str, count: int = 5, seed: int = 0
    ) -> List[UserProfile]:
        """
        Generate seeded profiles for one intent.

        Args:
            schema: Path to the intent schema
            utterances: Path to the first-utterance pool
            count: Number of profiles
            seed: Generation seed

        Returns:
            List of profiles

        Example:
            | ${profiles}= | Generate Profiles | fixtures/schemas/update_address.json | fixtures/utterances/update_address.txt | 5 | 7 |
        """
        self.schema = load_schema(schema)
        self.profiles = generate_profiles(
            self.schema, int(count), int(seed), load_utterances(utterances)
        )
        return self.profiles

    @keyword("Save Profiles")
    def save(self, path: str, profiles: Optional[List[UserProfile]] = None) -> str:
        written = write_profiles(profiles or self.profiles, path)
        logger.info(f"Wrote {len(profiles or self.profiles)} profiles to {written}")
        return str(written)

    @keyword("Load Profiles")
    def load(self, path: str) -> List[UserProfile]:
        self.profiles = load_profiles(path)
        return self.profiles

    @keyword("Get Profile As Dictionary")
    def as_dictionary(self, index: int = 0) -> Dict[str, Any]:
        """
        Example:
            | ${profile}= | Get Profile As Dictionary | 0 |
        """
        return self.profiles[int(index)].to_dict()

    @keyword("Customer Ids Should Be Unique")
    def customer_ids_should_be_unique(self):
        ids = [p.customer_id for p in self.profiles]
        if len(set(ids)) != len(ids):
            raise AssertionError(f"Duplicate customer ids among {len(ids)} profiles")

    @keyword("Scripted Reply Should Be")
    def scripted_reply_should_be(self, key: str, expected: str, index: int = 0):
        """
        Assert what the scripted client says for a prompt key.

        Example:
            | Scripted Reply Should Be | confirm_proceed | yes |
        """
        if self.schema is None:
            raise AssertionError("No intent schema loaded")
        client = ScriptedClient(self.profiles[int(index)], self.schema.reply_policy)
        actual = client.respond(key).text
        if actual != expected:
            raise AssertionError(f"Reply to {key}: expected {expected!r}, got {actual!r}")
