"""Alias-table intent matching for first utterances."""

import re
from typing import Optional, Sequence

from .catalog import IntentEntry

_NON_WORD = re.compile(r"[^a-z0-9]+")


def normalize(text: str) -> str:
    """Lowercase, collapse everything but letters and digits to single spaces, pad."""
    return f" {_NON_WORD.sub(' ', text.lower()).strip()} "


def alias_score(utterance: str, aliases: Sequence[str]) -> int:
    """Number of distinct aliases found as whole words in the utterance."""
    text = normalize(utterance)
    return sum(1 for alias in set(aliases) if normalize(alias) in text)


def match_intent(utterance: str, entries: Sequence[IntentEntry]) -> Optional[str]:
    """
    Best-matching intent name, or None when no alias occurs.

    Ties go to the intent registered first.
    """
    best, best_score = None, 0
    for entry in entries:
        score = alias_score(utterance, entry.aliases)
        if score > best_score:
            best, best_score = entry.name, score
    return best


def describe_services(entries: Sequence[IntentEntry]) -> str:
    names = [re.sub(r"(?<!^)(?=[A-Z])", " ", entry.name).lower() for entry in entries]
    return "I'm sorry, I can only help with: " + ", ".join(names) + "."
