import pytest

from libraries.orchestration.catalog import FIXTURES_DIR
from libraries.tools import (
    API_FAILURE,
    ManifestError,
    MissingArg,
    ToolKind,
    TypeMismatch,
    UnknownTool,
    VirtualClock,
    derive_seed,
    filter_tools,
    invoke,
    load_toolset,
)

TOOLS = FIXTURES_DIR / "tools"
RECORD = {"customer_id": 57742542, "account_type": "ROTH_IRA", "client_level": "PREMIUM", "account_balance": 900}


def manifest(*tools):
    return {"domain": "test", "intent": "test", "tools": list(tools)}


def coin(rate):
    return {"name": "coin", "kind": "exec", "outcomes": ["ok"], "failure_rate": rate, "latency": {"fixed": 5}}


@pytest.mark.parametrize(
    "name, info, exec_",
    [
        ("update_address", 1, 4),
        ("withdraw_retirement_funds", 1, 2),
        ("book_flight", 3, 6),
        ("cancel_flight", 2, 6),
        ("process_payment", 4, 15),
    ],
)
def test_manifest_counts(name, info, exec_):
    toolset = load_toolset(TOOLS / f"{name}.json")

    assert len(toolset.info_tools) == info
    assert len(toolset.exec_tools) == exec_
    assert all(spec.name.endswith("_extra") for spec in toolset.info_tools)


def test_duplicate_tool_name():
    with pytest.raises(ManifestError, match="Duplicate"):
        load_toolset(manifest(coin(0), coin(0)))


def test_extra_suffix_reserved_for_info_tools():
    tool = {"name": "lookup_extra", "kind": "exec", "outcomes": ["ok"]}
    with pytest.raises(ManifestError):
        load_toolset(manifest(tool))


def test_info_tool_reads_record():
    toolset = load_toolset(TOOLS / "update_address.json")

    outcome = invoke(toolset, "get_account_type_extra", {"customer_id": 57742542}, RECORD, seed=1)

    assert outcome.payload["account_type"] == "ROTH_IRA"
    assert outcome.payload["client_level"] == "PREMIUM"
    assert not outcome.failed
    assert 80 <= outcome.elapsed <= 160
    assert toolset.get("get_account_type_extra").kind is ToolKind.INFO


def test_invoke_is_deterministic():
    toolset = load_toolset(TOOLS / "update_address.json")
    args = {"street": "1 Main St", "city": "Raleigh", "state": "NC", "zip_code": "27601", "country": "USA"}

    first = invoke(toolset, "validate_address", args, RECORD, seed=42)
    second = invoke(toolset, "validate_address", args, RECORD, seed=42)

    assert first == second


def test_zero_failure_rate_never_fails():
    toolset = load_toolset(manifest(coin(0)))

    assert not any(invoke(toolset, "coin", {}, {}, seed).failed for seed in range(500))


def test_failure_rate_is_respected():
    toolset = load_toolset(manifest(coin(0.5)))

    outcomes = [invoke(toolset, "coin", {}, {}, derive_seed(7, "coin", i)) for i in range(1000)]
    failed = [o for o in outcomes if o.failed]

    assert abs(len(failed) / 1000 - 0.5) <= 0.05
    assert all(o.outcome == API_FAILURE for o in failed)


def test_argument_checks():
    toolset = load_toolset(TOOLS / "update_address.json")

    with pytest.raises(UnknownTool):
        invoke(toolset, "teleport", {}, RECORD, 0)
    with pytest.raises(MissingArg):
        invoke(toolset, "apply_address_hold", {}, RECORD, 0)
    with pytest.raises(TypeMismatch):
        invoke(toolset, "apply_address_hold", {"customer_id": "not a number"}, RECORD, 0)


def test_filter_tools():
    toolset = load_toolset(TOOLS / "update_address.json")

    assert len(filter_tools(toolset, [])) == 0
    assert filter_tools(toolset, toolset.names) == toolset
    kept = filter_tools(toolset, {"complete_case", "update_address"})
    assert kept.names == ("update_address", "complete_case")
    with pytest.raises(UnknownTool):
        filter_tools(toolset, {"teleport"})


def test_deterministic_copy():
    toolset = load_toolset(TOOLS / "update_address.json").deterministic()

    assert all(spec.failure_rate == 0 and spec.weights is None for spec in toolset.specs)


def test_derive_seed_separates_tools_and_occurrences():
    assert derive_seed(0, "a", 0) == derive_seed(0, "a", 0)
    assert derive_seed(0, "a", 0) != derive_seed(0, "a", 1)
    assert derive_seed(0, "a", 0) != derive_seed(0, "b", 0)


def test_virtual_clock():
    clock = VirtualClock()
    clock.advance(120)
    fork = clock.fork()
    fork.advance(30)

    assert clock.now() == 120
    assert fork.now() == 150
    clock.advance_to(100)
    assert clock.now() == 120
    with pytest.raises(ValueError):
        clock.advance(-1)
