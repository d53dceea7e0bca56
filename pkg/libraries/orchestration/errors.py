"""Errors raised while running a session."""


class OrchestrationError(Exception):
    """Base class for session errors."""


class UnknownDomain(OrchestrationError):
    def __init__(self, domain: str):
        self.domain = domain
        super().__init__(f"Unknown domain: {domain}")


class OutOfScopeIntent(OrchestrationError):
    """No registered intent of the session's domain matches the utterance."""

    def __init__(self, utterance: str, domain: str):
        self.utterance = utterance
        self.domain = domain
        super().__init__(f"No {domain} intent matches: {utterance!r}")


class AuthFailed(OrchestrationError):
    def __init__(self, attempts: int):
        self.attempts = attempts
        super().__init__(f"Authentication failed after {attempts} attempts")


class ExecutorStuck(OrchestrationError):
    """Fulfillment cannot continue from a step, usually a fixture or trim bug."""

    def __init__(self, step: str, reason: str):
        self.step = step
        self.reason = reason
        super().__init__(f"Executor stuck at step {step}: {reason}")


class BarrierViolation(OrchestrationError):
    """Fulfillment was entered before authentication and personalization finished."""
