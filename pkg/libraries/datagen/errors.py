"""Errors raised while generating profiles and scripted replies."""


class DatagenError(Exception):
    """Base class for data generation errors."""


class SchemaIncomplete(DatagenError):
    """An intent schema cannot produce everything its workflow reads."""

    def __init__(self, intent: str, missing):
        self.intent = intent
        self.missing = sorted(missing)
        super().__init__(f"Schema for {intent} does not cover: {', '.join(self.missing)}")


class UnknownPrompt(DatagenError):
    """The scripted client has no answer for a prompt key."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"No scripted reply for prompt: {key}")
