import copy

import pytest
import requests

from libraries.orchestration import ExecutorStuck, OrchestrationError
from libraries.orchestration.backend import HttpDialogueBackend, ReferenceBackend, make_backend

from .conftest import ADDRESS, CUSTOMER_ID

BASE_URL = "http://agent.test/"


class FakeResponse:
    def __init__(self, body=None, status=200):
        self.body = body
        self.status_code = status

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(f"{self.status_code} Server Error")

    def json(self):
        if self.body is None:
            raise ValueError("Expecting value: line 1 column 1 (char 0)")
        return self.body


class ScriptedAgent:
    """Stands in for ``session.post``: answers each turn from a fixed script."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.requests = []

    def __call__(self, url, json=None, timeout=None):
        self.requests.append({"url": url, "body": copy.deepcopy(json), "timeout": timeout})
        reply = self.replies.pop(0) if len(self.replies) > 1 else self.replies[0]
        return reply if isinstance(reply, FakeResponse) else FakeResponse(reply)


def tool_call(name, **args):
    return {"tool_call": {"name": name, "args": args}}


ADDRESS_UPDATE = [
    {"message": "Would you like to proceed with the address update?", "prompt_key": "confirm_proceed"},
    {"message": "Please share your new address.", "prompt_key": "new_address"},
    tool_call("validate_address", **ADDRESS),
    tool_call("update_address", customer_id=CUSTOMER_ID, **ADDRESS),
    {"message": "Your address has been updated."},
    tool_call("complete_case", customer_id=CUSTOMER_ID),
]


@pytest.fixture
def backend():
    http = HttpDialogueBackend(BASE_URL, timeout=5)
    yield http
    http.close()


def script(monkeypatch, backend, replies):
    agent = ScriptedAgent(replies)
    monkeypatch.setattr(backend.session, "post", agent)
    return agent


def test_session_driven_by_the_agent(engine, profile, backend, monkeypatch):
    agent = script(monkeypatch, backend, ADDRESS_UPDATE)

    trajectory = engine.run_session(profile, "warpp", seed=0, backend=backend)

    assert trajectory.status == "completed"
    assert trajectory.tool_names("fulfillment") == ["validate_address", "update_address", "complete_case"]
    assert len(agent.requests) == len(ADDRESS_UPDATE)

    first = agent.requests[0]
    assert first["url"] == "http://agent.test/next"
    assert first["timeout"] == 5
    assert first["body"]["session_id"] == trajectory.session_id
    assert first["body"]["messages"] == []
    assert {tool["name"] for tool in first["body"]["tools"]} == {"validate_address", "update_address", "complete_case"}
    assert "Call `validate_address(" in first["body"]["workflow"]
    assert "get_account_type_extra" not in first["body"]["workflow"]


def test_history_grows_turn_by_turn(engine, profile, backend, monkeypatch):
    agent = script(monkeypatch, backend, ADDRESS_UPDATE)

    engine.run_session(profile, "warpp", seed=0, backend=backend)

    last = agent.requests[-1]["body"]["messages"]
    assert [m["role"] for m in last] == ["assistant", "user", "assistant", "user", "tool", "tool", "assistant"]
    assert ADDRESS["street"] in last[3]["content"]
    assert last[4]["name"] == "validate_address"
    assert last[5]["content"]["tool"] == "update_address"
    assert last[6]["content"] == "Your address has been updated."


def test_message_without_prompt_key_waits_for_no_reply(engine, profile, backend, monkeypatch):
    agent = script(monkeypatch, backend, [{"message": "One moment."}, tool_call("complete_case", customer_id=CUSTOMER_ID)])

    trajectory = engine.run_session(profile, "noper", seed=0, backend=backend)

    assert trajectory.tool_names("fulfillment") == ["complete_case"]
    assert [m["role"] for m in agent.requests[1]["body"]["messages"]] == ["assistant"]


@pytest.mark.parametrize(
    "body",
    [
        {},
        {"message": 3},
        {"tool_call": {"args": {}}},
        {"tool_call": {"name": "complete_case", "args": "customer_id"}},
        {"message": "Closing now.", "tool_call": {"name": "complete_case"}},
    ],
)
def test_malformed_response_is_rejected(backend, monkeypatch, body):
    script(monkeypatch, backend, [body])

    with pytest.raises(OrchestrationError, match="Malformed dialogue backend response"):
        backend.next_action({"session_id": "s", "messages": []})


@pytest.mark.parametrize(
    "failure",
    [
        requests.ConnectionError("connection refused"),
        requests.Timeout("read timed out"),
        FakeResponse({"message": "unused"}, status=503),
        FakeResponse(None),
    ],
)
def test_transport_errors_become_orchestration_errors(backend, monkeypatch, failure):
    def post(url, json=None, timeout=None):
        if isinstance(failure, Exception):
            raise failure
        return failure

    monkeypatch.setattr(backend.session, "post", post)

    with pytest.raises(OrchestrationError, match="Dialogue backend at http://agent.test/next failed"):
        backend.next_action({"session_id": "s", "messages": []})


def test_unknown_tool_leaves_the_session_stuck(engine, profile, backend, monkeypatch):
    script(monkeypatch, backend, [tool_call("teleport_customer")])

    with pytest.raises(ExecutorStuck):
        engine.run_session(profile, "noper", seed=0, backend=backend)


def test_agent_that_never_closes_runs_out_of_turns(engine, profile, backend, monkeypatch):
    agent = script(monkeypatch, backend, [{"message": "Still thinking."}])

    with pytest.raises(ExecutorStuck, match="no complete_case after 500 turns"):
        engine.run_session(profile, "noper", seed=0, backend=backend)
    assert len(agent.requests) == 500


def test_make_backend():
    http = make_backend("http", base_url=BASE_URL, retry_attempts=2)
    retry = http.session.get_adapter("http://agent.test/next").max_retries

    assert isinstance(http, HttpDialogueBackend)
    assert http.base_url == "http://agent.test"
    assert retry.total == 2
    assert 503 in retry.status_forcelist
    assert isinstance(make_backend(), ReferenceBackend)
    with pytest.raises(ValueError, match="Unknown dialogue backend"):
        make_backend("grpc")
