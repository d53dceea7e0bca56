import random

import numpy as np
import pytest

from libraries.datagen import ScriptedClient, generate_profiles
from libraries.orchestration import (
    CLIENT,
    PERSONALIZER,
    BarrierViolation,
    Engine,
    EngineConfig,
    EventKind,
    Mode,
    Stage,
    Trajectory,
    match_intent,
)
from libraries.personalizer import PersonalizerError
from libraries.tools import LatencySpec
from libraries.workflow import INFO_SUFFIX

from .conftest import make_profile

MODES = ["warpp", "noper", "react"]


def exec_calls(trajectory):
    return [
        (e.tool, e.params)
        for e in trajectory.tool_events("fulfillment")
        if not e.tool.endswith(INFO_SUFFIX)
    ]


def test_warpp_fulfillment_tools(engine, profile):
    trajectory = engine.run_session(profile, "warpp", seed=0)

    assert trajectory.status == "completed"
    assert trajectory.tool_names("fulfillment") == ["validate_address", "update_address", "complete_case"]


@pytest.mark.parametrize("mode", ["noper", "react"])
def test_full_workflow_modes_look_up_account(engine, profile, mode):
    trajectory = engine.run_session(profile, mode, seed=0)

    assert trajectory.tool_names("fulfillment") == [
        "get_account_type_extra",
        "validate_address",
        "update_address",
        "complete_case",
    ]


def test_client_declines(engine):
    trajectory = engine.run_session(make_profile(confirm="no"), "warpp", seed=0)

    assert trajectory.tool_names("fulfillment") == ["complete_case"]


def test_standard_client_gets_address_hold(engine):
    trajectory = engine.run_session(make_profile("STANDARD"), "warpp", seed=0)

    assert "apply_address_hold" in trajectory.tool_names("fulfillment")


def test_parallel_personalization_hides_latency(timed_engine, profile):
    parallel = timed_engine(parallel=True).run_session(profile, "warpp", seed=0)
    sequential = timed_engine(parallel=False).run_session(profile, "warpp", seed=0)
    noper = timed_engine().run_session(profile, "noper", seed=0)

    assert parallel.pre_fulfillment_ms == 500
    assert sequential.pre_fulfillment_ms == 800
    assert noper.pre_fulfillment_ms == 500
    assert parallel.tool_names("fulfillment") == sequential.tool_names("fulfillment")


def test_barrier_waits_for_the_slower_lane(catalog, profile):
    rng = random.Random(23)
    for _ in range(150):
        send, verify, lookup = rng.randint(1, 400), rng.randint(1, 400), rng.randint(1, 900)
        overrides = {
            "send_verification_text": LatencySpec.fixed(send),
            "code_verifier": LatencySpec.fixed(verify),
            "get_account_type_extra": LatencySpec.fixed(lookup),
        }
        for parallel, expected in ((True, max(send + verify, lookup)), (False, send + verify + lookup)):
            config = EngineConfig(
                deterministic_tools=True, parallel_personalization=parallel, latency_overrides=overrides
            )
            trajectory = Engine(catalog, config).run_session(profile, "warpp", seed=0)
            assert trajectory.pre_fulfillment_ms == expected, (send, verify, lookup, parallel)


@pytest.mark.parametrize("seed", range(10))
def test_fulfillment_waits_for_barrier(catalog, profile, seed):
    engine = Engine(catalog)
    session = engine.start_session(profile, "warpp", seed)
    engine.identify_intent(session)
    engine.authenticate_and_personalize(session)
    trajectory = engine.fulfill(session)

    fulfillment = [e for e in trajectory.events if e.stage == Stage.FULFILLMENT.value]
    personalizer = [e for e in trajectory.events if e.lane == "personalizer"]
    assert fulfillment
    assert all(e.at >= session.barrier_at for e in fulfillment)
    assert all(e.at <= session.barrier_at for e in personalizer)


def test_fulfillment_before_auth_is_rejected(engine, profile):
    session = engine.start_session(profile, "warpp", 0)
    engine.identify_intent(session)

    with pytest.raises(BarrierViolation):
        session.advance(Stage.FULFILLMENT)


@pytest.mark.parametrize("seed", range(5))
def test_modes_agree_on_executed_tools(catalog, seed):
    engine = Engine(catalog)
    entry = catalog.intent("updateAddress")
    for profile in generate_profiles(entry.schema, 10, seed, entry.utterances):
        runs = [engine.run_session(profile, mode, seed) for mode in MODES]
        warpp, noper, react = (exec_calls(t) for t in runs)
        assert warpp == noper == react, profile.customer_id


@pytest.fixture(scope="module")
def catalog_runs(catalog):
    """Fifty profiles of every intent run in each mode with tool failures on."""
    engine = Engine(catalog)
    runs = {}
    for entry in catalog.intents():
        for index, profile in enumerate(generate_profiles(entry.schema, 50, 0, entry.utterances)):
            runs[(entry.name, index)] = [engine.run_session(profile, mode, 0) for mode in MODES]
    return runs


def test_modes_agree_across_the_catalog(catalog_runs):
    assert len(catalog_runs) == 250
    for key, runs in catalog_runs.items():
        assert [t.status for t in runs] == ["completed"] * 3, key
        warpp, noper, react = (exec_calls(t) for t in runs)
        assert warpp == noper == react, key


def test_mean_tokens_rank_the_modes(catalog, catalog_runs):
    for entry in catalog.intents():
        per_mode = np.array(
            [[t.tokens for t in runs] for (intent, _), runs in catalog_runs.items() if intent == entry.name]
        )
        warpp, noper, react = per_mode.mean(axis=0)
        assert warpp < noper < react, entry.name
        if entry.name == "processPayment":
            assert warpp / react <= 0.6


def test_warpp_uses_fewest_tokens(engine, profile):
    warpp, noper, react = (engine.run_session(profile, mode, seed=0) for mode in MODES)

    assert react.tokens > noper.tokens > warpp.tokens
    assert warpp.personalizer_tokens > 0
    assert noper.personalizer_tokens == 0


def test_client_utterances_are_not_charged(engine, profile):
    trajectory = engine.run_session(profile, "warpp", seed=0)
    heard = [e for e in trajectory.events if e.agent == CLIENT]

    assert heard
    assert all(e.role == "client" and e.tokens_in == e.tokens_out == 0 for e in heard)
    assert all(e.tokens_in == e.tokens_out == 0 for e in trajectory.events if e.agent == PERSONALIZER)


@pytest.mark.parametrize("mode", MODES)
def test_replay_is_identical(catalog, profile, mode):
    first = Engine(catalog).run_session(profile, mode, seed=3)
    second = Engine(catalog).run_session(profile, mode, seed=3)

    assert first.to_jsonl() == second.to_jsonl()


def test_trajectory_log_round_trip(engine, profile, tmp_path):
    trajectory = engine.run_session(profile, "warpp", seed=0)

    path = trajectory.write(tmp_path / "session.jsonl", meta={"run": "unit"})

    assert Trajectory.read(path).to_dict() == trajectory.to_dict()


def test_personalizer_failure_falls_back(engine, profile, monkeypatch):
    def broken(*args, **kwargs):
        raise PersonalizerError("boom")

    monkeypatch.setattr("libraries.orchestration.engine.trim", broken)

    trajectory = engine.run_session(profile, "warpp", seed=0)

    assert trajectory.status == "completed"
    assert any(e.kind is EventKind.FALLBACK for e in trajectory.events)
    assert trajectory.tool_names("fulfillment")[0] == "get_account_type_extra"


def test_out_of_scope_utterance(engine):
    profile = make_profile()
    profile.user_provided_info["first_utterance"] = "What is the weather like today"

    trajectory = engine.run_session(profile, "warpp", seed=0)

    assert trajectory.status == "out_of_scope"
    assert trajectory.tool_names() == []
    replies = [e.text for e in trajectory.events if e.kind is EventKind.UTTERANCE and e.agent != CLIENT]
    assert replies[-1].startswith("I'm sorry, I can only help with")


def test_auth_retries(engine, profile, update_address):
    client = ScriptedClient(profile, update_address.schema.reply_policy, [111111, 222222])

    trajectory = engine.run_session(profile, "warpp", seed=0, client=client)

    outcomes = [e.outcome for e in trajectory.tool_events() if e.tool == "code_verifier"]
    assert outcomes == ["rejected", "rejected", "verified"]
    assert trajectory.status == "completed"


def test_auth_failure_closes_session(engine, profile, update_address):
    client = ScriptedClient(profile, update_address.schema.reply_policy, [111111, 222222, 333333])

    trajectory = engine.run_session(profile, "noper", seed=0, client=client)

    assert trajectory.status == "auth_failed"
    assert trajectory.tool_events("fulfillment") == []


@pytest.mark.parametrize(
    "utterance, intent",
    [
        ("I moved and need to update my address", "updateAddress"),
        ("I want to withdraw from my 401k", "withdrawRetirementFunds"),
        ("Can you tell me a joke", None),
    ],
)
def test_match_intent(catalog, utterance, intent):
    assert match_intent(utterance, catalog.intents("banking")) == intent


def test_mode_parsing():
    assert Mode.parse("Warpp") is Mode.WARPP
    assert Mode.parse("noper") is Mode.NO_PERSONALIZATION
    with pytest.raises(ValueError):
        Mode.parse("auto")


def test_every_intent_completes(catalog):
    engine = Engine(catalog, EngineConfig(deterministic_tools=True))
    for entry in catalog.intents():
        for profile in generate_profiles(entry.schema, 5, 1, entry.utterances):
            trajectory = engine.run_session(profile, "warpp", seed=1)
            assert trajectory.status == "completed", (entry.name, profile.customer_id)
            assert trajectory.tool_names("fulfillment")[-1] == "complete_case"
