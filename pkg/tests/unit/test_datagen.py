import pytest

from libraries.datagen import (
    EXIT,
    DatagenError,
    SchemaIncomplete,
    ScriptedClient,
    UnknownPrompt,
    UserProfile,
    check_schema,
    generate_profiles,
    load_profiles,
    load_schema,
    write_profiles,
)
from libraries.datagen.ground_truth import GroundTruth, generate_ground_truth
from libraries.orchestration import Engine, EngineConfig

from .conftest import AUTH_CODE, make_profile


def test_profiles_are_reproducible(update_address):
    first = generate_profiles(update_address.schema, 20, 7, update_address.utterances)
    second = generate_profiles(update_address.schema, 20, 7, update_address.utterances)

    assert first == second
    assert len({p.customer_id for p in first}) == 20


def test_seed_changes_profiles(update_address):
    first = generate_profiles(update_address.schema, 5, 0, update_address.utterances)
    second = generate_profiles(update_address.schema, 5, 1, update_address.utterances)

    assert first != second


def test_profile_fields(update_address):
    for profile in generate_profiles(update_address.schema, 20, 0, update_address.utterances):
        assert profile.intent == "updateAddress"
        assert profile.domain == "banking"
        assert profile.attributes["client_level"] in ("PREMIUM", "STANDARD")
        assert 500 <= profile.attributes["account_balance"] <= 120000
        assert profile.first_utterance in update_address.utterances
        assert profile.user_provided_info["address"]["country"] == "USA"


def test_profile_count_must_be_positive(update_address):
    with pytest.raises(ValueError):
        generate_profiles(update_address.schema, 0, 0, update_address.utterances)


def test_utterance_pool_required(update_address):
    with pytest.raises(SchemaIncomplete):
        generate_profiles(update_address.schema, 1, 0, [])


def test_profiles_file_round_trip(update_address, tmp_path):
    profiles = generate_profiles(update_address.schema, 3, 0, update_address.utterances)

    path = write_profiles(profiles, tmp_path / "profiles.json")

    assert load_profiles(path) == profiles


def test_load_profiles_rejects_garbage(tmp_path):
    path = tmp_path / "profiles.json"
    path.write_text("not json", encoding="utf-8")

    with pytest.raises(DatagenError):
        load_profiles(path)


def test_record_exposes_attributes():
    record = make_profile("STANDARD").to_record()

    assert record["client_level"] == "STANDARD"
    assert record["authenticator_api"]["authenticator_code"] == AUTH_CODE
    assert "user_provided_info" not in record


def test_profile_dict_round_trip():
    profile = make_profile()

    assert UserProfile.from_dict(profile.to_dict()) == profile


def test_schema_rejects_bad_weights():
    document = {
        "intent": "demo",
        "domain": "test",
        "fields": [{"path": "tier", "values": ["A", "B"], "weights": [1.0]}],
    }

    with pytest.raises(DatagenError):
        load_schema(document)


def test_bundled_schemas_cover_their_workflows(catalog):
    for entry in catalog.intents():
        check_schema(entry.schema, entry.workflow, entry.toolset)


def test_incomplete_schema(update_address):
    document = update_address.schema.to_dict()
    document["fields"] = [f for f in document["fields"] if f["path"] != "client_level"]

    with pytest.raises(SchemaIncomplete) as info:
        check_schema(load_schema(document), update_address.workflow, update_address.toolset)

    assert "client_level" in str(info.value)


class TestScriptedClient:
    @pytest.fixture
    def client(self, profile, update_address):
        return ScriptedClient(profile, update_address.schema.reply_policy)

    def test_opening(self, client):
        assert client.opening().text == "Hi, I need to change my address on file."

    def test_address_is_spoken(self, client):
        reply = client.respond("new_address")

        assert reply.text == "742 Evergreen Terrace, Greenville, NC 28202, USA"
        assert reply.value["zip_code"] == "28202"

    def test_answers_follow_policy(self, client):
        assert client.respond("confirm_proceed").text == "yes"

    def test_verification_code(self, client):
        assert client.verification_code().text == str(AUTH_CODE)

    def test_scripted_codes_come_first(self, profile):
        client = ScriptedClient(profile, auth_codes=[111111])

        assert client.verification_code().value == 111111
        assert client.verification_code().value == AUTH_CODE

    def test_unknown_prompt(self, client):
        with pytest.raises(UnknownPrompt):
            client.respond("favourite_colour")

    def test_exit_after_finish(self, client):
        client.finish()

        assert client.respond("confirm_proceed").text == EXIT


class TestGroundTruth:
    @pytest.fixture
    def engine(self, catalog):
        return Engine(catalog, EngineConfig(deterministic_tools=True))

    def test_premium_fulfillment(self, engine):
        gt = generate_ground_truth(make_profile("PREMIUM"), "warpp", 0, engine)

        assert gt.mode == "warpp"
        assert gt.trajectory.tool_names("fulfillment") == ["validate_address", "update_address", "complete_case"]

    def test_written_and_read(self, engine, tmp_path):
        gt = generate_ground_truth(make_profile(), "noper", 2, engine)

        path = gt.write(tmp_path / "gt.jsonl", meta={"experiment": "unit"})
        loaded = GroundTruth.read(path)

        assert loaded.seed == 2
        assert loaded.trajectory.to_dict() == gt.trajectory.to_dict()

    def test_plain_trajectory_is_not_ground_truth(self, engine, profile, tmp_path):
        path = engine.run_session(profile, "warpp", seed=0).write(tmp_path / "run.jsonl")

        with pytest.raises(ValueError, match="ground-truth"):
            GroundTruth.read(path)
