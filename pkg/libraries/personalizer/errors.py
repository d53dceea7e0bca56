"""Errors raised while personalizing a workflow."""


class PersonalizerError(Exception):
    """Base class for personalizer errors."""


class MissingAttribute(PersonalizerError):
    """A decidable condition or an info tool needs a value the client record lacks."""

    def __init__(self, path: str):
        self.path = path
        super().__init__(f"Missing client attribute: {path}")


class FidelityViolation(PersonalizerError):
    """A retained step lost behaviour the original workflow requires."""

    def __init__(self, step: str, reason: str = "required branch cannot be restored"):
        self.step = step
        self.reason = reason
        super().__init__(f"step {step}: {reason}")
