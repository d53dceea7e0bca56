"""Synthetic profiles, scripted clients and ground-truth trajectories."""

from .client import EXIT, Reply, ScriptedClient, render_reply
from .errors import DatagenError, SchemaIncomplete, UnknownPrompt
from .profiles import UserProfile, generate_profiles, load_profiles, write_profiles
from .schema import FieldSpec, IntentSchema, check_schema, load_schema
from .utterances import load_utterances
from .ProfileFactory import ProfileFactory

__version__ = "1.0.0"
__all__ = [
    "EXIT",
    "DatagenError",
    "FieldSpec",
    "IntentSchema",
    "ProfileFactory",
    "Reply",
    "SchemaIncomplete",
    "ScriptedClient",
    "UnknownPrompt",
    "UserProfile",
    "check_schema",
    "generate_profiles",
    "load_profiles",
    "load_schema",
    "load_utterances",
    "render_reply",
    "write_profiles",
]
