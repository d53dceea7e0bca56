"""Shared fixtures: the bundled catalog, one hand-written profile and engines."""

import pytest

from libraries.datagen import UserProfile
from libraries.orchestration import Catalog, Engine, EngineConfig
from libraries.tools import LatencySpec
from libraries.workflow import parse_workflow

CUSTOMER_ID = 12345678
AUTH_CODE = 984264

ADDRESS = {
    "street": "742 Evergreen Terrace",
    "city": "Greenville",
    "state": "NC",
    "zip_code": "28202",
    "country": "USA",
}


def make_profile(client_level="PREMIUM", confirm="yes", **attributes):
    return UserProfile(
        customer_id=CUSTOMER_ID,
        intent="updateAddress",
        domain="banking",
        attributes={
            "account_type": "CHECKING",
            "client_level": client_level,
            "account_balance": 5000,
            **attributes,
        },
        user_provided_info={
            "first_utterance": "Hi, I need to change my address on file.",
            "address": dict(ADDRESS),
            "answers": {"confirm_proceed": confirm},
            "authenticator_code": AUTH_CODE,
            "mobile_phone_number": 5551234567,
        },
        authenticator_code=AUTH_CODE,
        mobile_phone_number=5551234567,
    )


@pytest.fixture(scope="session")
def catalog():
    return Catalog.load()


@pytest.fixture(scope="session")
def update_address(catalog):
    return catalog.intent("updateAddress")


@pytest.fixture
def profile():
    return make_profile()


@pytest.fixture
def engine(catalog):
    return Engine(catalog, EngineConfig(deterministic_tools=True))


@pytest.fixture
def timed_engine(catalog):
    """Authentication takes 500 ms and the info lookup 300 ms."""

    def build(parallel=True):
        overrides = {
            "send_verification_text": LatencySpec.fixed(250),
            "code_verifier": LatencySpec.fixed(250),
            "get_account_type_extra": LatencySpec.fixed(300),
        }
        config = EngineConfig(
            deterministic_tools=True,
            parallel_personalization=parallel,
            latency_overrides=overrides,
        )
        return Engine(catalog, config)

    return build


def binary_branches(n):
    """Source of a workflow with ``n`` independent attribute branches, each calling a tool."""
    lines = ["@workflow synthetic domain=test intent=synthetic"]
    for i in range(n):
        lines.append(f"{i + 1}. Check flag {i}")
        lines.append(f"  * If flag_{i} == true:")
        lines.append(f"    {i + 1}.1. Call `tool_{i}(customer_id)`")
    lines.append(f"{n + 1}. Call `complete_case(customer_id)`")
    return "\n".join(lines) + "\n"


@pytest.fixture
def synthetic():
    return lambda n: parse_workflow(binary_branches(n))
