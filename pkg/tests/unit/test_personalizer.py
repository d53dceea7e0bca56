from dataclasses import replace

import pytest

from libraries.datagen import generate_profiles
from libraries.personalizer import (
    ClientData,
    EditKind,
    FidelityViolation,
    MissingAttribute,
    audit,
    call_paths,
    oracle_trim,
    pass1_prune,
    pass2_fidelity,
    pass3_cleanup,
    trim,
)
from libraries.personalizer.audit import step_key
from libraries.workflow import (
    INFO_SUFFIX,
    Action,
    ActionKind,
    ArgExpr,
    Decision,
    Step,
    enumerate_paths,
    parse_workflow,
    serialize_workflow,
    token_count,
)

from .conftest import CUSTOMER_ID, make_profile

HEADER = "@workflow demo domain=test intent=demo\n"
PROFILES_PER_INTENT = 50


def client_for(entry, profile):
    return ClientData.from_record(profile.to_record(), entry.toolset, entry.schema.nullable)


def flags(n, value):
    return ClientData(CUSTOMER_ID, {"customer_id": CUSTOMER_ID, **{f"flag_{i}": value for i in range(n)}})


def corpus(catalog):
    for entry in catalog.intents():
        for profile in generate_profiles(entry.schema, PROFILES_PER_INTENT, 0, entry.utterances):
            yield entry, client_for(entry, profile)


@pytest.fixture(scope="module")
def cases(catalog):
    return list(corpus(catalog))


def test_premium_drops_address_hold(update_address):
    result = trim(update_address.workflow, client_for(update_address, make_profile("PREMIUM")), update_address.toolset)

    assert result.tools == {"validate_address", "update_address", "complete_case"}
    assert set(result.toolset.names) == result.tools
    assert not any(tool.endswith(INFO_SUFFIX) for tool in result.tools)
    assert any("get_account_type_extra" in edit.detail for edit in result.edits_of(EditKind.INLINED_VALUE))
    assert [edit.at for edit in result.edits_of(EditKind.PRUNED_BRANCH)] == ["4"]
    assert '"client_level":"PREMIUM"' in result.workflow.steps[0].prose


def test_standard_keeps_address_hold(update_address):
    result = trim(update_address.workflow, client_for(update_address, make_profile("STANDARD")), update_address.toolset)

    assert "apply_address_hold" in result.tools
    assert result.workflow.steps[-1].terminates


def test_null_attribute_keeps_both_branches(update_address):
    client = ClientData.from_info_results(
        CUSTOMER_ID,
        {"get_account_type_extra": {"account_type": "CHECKING", "client_level": None, "account_balance": 10}},
    )

    result = trim(update_address.workflow, client, update_address.toolset)

    assert "apply_address_hold" in result.tools
    assert not result.edits_of(EditKind.PRUNED_BRANCH)


def test_missing_attribute(update_address):
    with pytest.raises(MissingAttribute):
        pass1_prune(update_address.workflow, ClientData(CUSTOMER_ID, {"customer_id": CUSTOMER_ID}))


def test_prune_fixpoint():
    w = parse_workflow(HEADER + "1. Call `notify(customer_id)`\n2. Call `complete_case(customer_id)`\n")

    assert pass1_prune(w, ClientData(CUSTOMER_ID)) == (w, [])


def test_known_arguments_are_inlined():
    w = parse_workflow(HEADER + "1. Call `notify(customer_id)`\n2. Call `complete_case(customer_id)`\n")

    pruned, edits = pass1_prune(w, ClientData(CUSTOMER_ID, {"customer_id": CUSTOMER_ID}))

    assert pruned.steps[0].actions[0].arg_map["customer_id"] == ArgExpr.literal(CUSTOMER_ID)
    assert {edit.kind for edit in edits} == {EditKind.INLINED_VALUE}


def test_fidelity_restores_outcome_branch(update_address):
    w = update_address.workflow
    client = client_for(update_address, make_profile())
    pruned, _ = pass1_prune(w, client)
    step2 = pruned.find("2")
    broken = replace(pruned, steps=tuple(replace(s, branches=()) if s is step2 else s for s in pruned.steps))

    restored, edits = pass2_fidelity(broken, w, client)

    assert restored == pruned
    assert [(edit.kind, edit.at) for edit in edits] == [(EditKind.RESTORED_BRANCH, "2")]


def test_fidelity_rejects_changed_calls(update_address):
    w = update_address.workflow
    pruned, _ = pass1_prune(w, client_for(update_address, make_profile()))
    step2 = pruned.find("2")
    no_call = replace(step2, actions=tuple(a for a in step2.actions if a.kind is not ActionKind.TOOL_CALL))
    broken = replace(pruned, steps=tuple(no_call if s is step2 else s for s in pruned.steps))

    with pytest.raises(FidelityViolation):
        pass2_fidelity(broken, w)


def test_fidelity_keeps_fraud_and_3ds_branches(catalog):
    entry = catalog.intent("processPayment")
    profiles = [
        p
        for p in generate_profiles(entry.schema, PROFILES_PER_INTENT, 0, entry.utterances)
        if p.attributes["payment_method"] == "CREDIT_CARD"
        and p.attributes["account_status"] != "suspended"
        and p.attributes["balance"] > 0
    ]
    assert profiles

    for profile in profiles:
        rendered = serialize_workflow(trim(entry.workflow, client_for(entry, profile), entry.toolset).workflow)
        assert 'If run_fraud_check returns "flagged":' in rendered
        assert 'If initiate_3ds_auth returns "failed":' in rendered


def test_cleanup_merges_tool_free_steps():
    w = parse_workflow(
        HEADER + '1. Greet\n  - Say "a"\n2. Explain\n  - Say "b"\n3. Call `complete_case(customer_id)`\n'
    )

    cleaned, edits = pass3_cleanup(w)

    assert [s.label for s in cleaned.steps] == ["1", "2"]
    assert cleaned.steps[0].prose == "Greet; Explain"
    assert len(cleaned.steps[0].actions) == 2
    assert {edit.kind for edit in edits} == {EditKind.MERGED_STEPS, EditKind.RENUMBERED}


def test_cleanup_rewrites_goto_targets():
    w = parse_workflow(
        HEADER
        + '1. Greet\n  - Say "a"\n2. Explain\n  - Say "b"\n'
        + "3. Check\n  - Call `check(customer_id)`\n"
        + '  * If check returns "bad":\n    3.1. Go to step 5\n'
        + "4. Call `complete_case(customer_id)`\n5. Call `complete_case(customer_id)`\n"
    )

    cleaned, _ = pass3_cleanup(w)

    assert [s.label for s in cleaned.steps] == ["1", "2", "3", "4"]
    assert cleaned.find("2.1").actions[0].target == "4"


def test_cleanup_identity():
    w = parse_workflow(HEADER + "1. Call `notify(customer_id)`\n2. Call `complete_case(customer_id)`\n")

    assert pass3_cleanup(w) == (w, [])


def test_cleanup_closes_open_ending():
    w = parse_workflow(HEADER + "1. Call `complete_case(customer_id)`\n")
    open_ended = replace(w, steps=(Step("1", actions=(Action(ActionKind.TOOL_CALL, tool="notify"),)),))

    cleaned, edits = pass3_cleanup(open_ended, customer_id=CUSTOMER_ID)

    assert cleaned.steps[-1].terminates
    assert cleaned.steps[-1].actions[0].arg_map["customer_id"] == ArgExpr.literal(CUSTOMER_ID)
    assert edits[0].kind is EditKind.ADDED_TERMINAL


@pytest.mark.parametrize("value", [True, False])
def test_fully_resolved_branches_leave_one_path(synthetic, value):
    w = synthetic(10)

    result = trim(w, flags(10, value))

    assert enumerate_paths(w).count == 1024
    assert enumerate_paths(result.workflow).count == 1
    assert result.stats.within_linear_bound(w.step_count, 0)


def test_oracle_limit(synthetic):
    with pytest.raises(ValueError, match="oracle limit"):
        oracle_trim(synthetic(17), flags(17, True))


def test_corpus_trims(cases):
    for entry, client in cases:
        w = entry.workflow
        result = trim(w, client, entry.toolset)
        trimmed = result.workflow

        assert result.tools == trimmed.tool_names()
        assert set(result.toolset.names) == result.tools
        assert not any(tool.endswith(INFO_SUFFIX) for tool in result.tools)
        assert trimmed.steps[-1].terminates or trimmed.steps[-1].ends_unconditionally
        assert token_count(trimmed) <= token_count(w)
        assert enumerate_paths(trimmed).count <= enumerate_paths(w).count
        assert result.stats.within_linear_bound(w.step_count, len(entry.toolset))


def test_oracle_walks_the_selected_branches(synthetic):
    w = synthetic(10)
    every_other = ClientData(CUSTOMER_ID, {"customer_id": CUSTOMER_ID, **{f"flag_{i}": i % 2 == 0 for i in range(10)}})

    expected = oracle_trim(w, every_other)

    (path,) = expected.paths
    assert [tool for tool, _ in path] == ["tool_0", "tool_2", "tool_4", "tool_6", "tool_8", "complete_case"]
    assert all(dict(args) == {"customer_id": str(CUSTOMER_ID)} for _, args in path)


def test_corpus_matches_oracle(cases):
    for entry, client in cases:
        expected = oracle_trim(entry.workflow, client)
        trimmed = trim(entry.workflow, client, entry.toolset).workflow
        assert call_paths(trimmed, client) == expected.paths, entry.name


def test_oracle_rejects_a_wrong_branch_decision(update_address):
    client = client_for(update_address, make_profile("STANDARD"))
    expected = oracle_trim(update_address.workflow, client)

    def always_false(step, index, condition):
        return Decision.UNKNOWN if condition.is_runtime else Decision.FALSE

    wrong = trim(update_address.workflow, client, update_address.toolset, decider=always_false).workflow

    assert "apply_address_hold" in expected.tools
    assert "apply_address_hold" not in wrong.tool_names()
    assert call_paths(wrong, client) != expected.paths
    assert audit(wrong, update_address.workflow, client).completeness == 3


def test_corpus_trim_is_idempotent(cases):
    for entry, client in cases:
        once = trim(entry.workflow, client, entry.toolset).workflow
        assert trim(once, client, entry.toolset).workflow == once


def test_corpus_audits_clean(cases):
    for entry, client in cases:
        trimmed = trim(entry.workflow, client, entry.toolset).workflow
        result = audit(trimmed, entry.workflow, client)
        assert (result.relevance, result.completeness) == (5, 5), result.findings


def test_process_payment_paths_shrink(catalog):
    entry = catalog.intent("processPayment")
    full = enumerate_paths(entry.workflow).count

    for profile in generate_profiles(entry.schema, PROFILES_PER_INTENT, 0, entry.utterances):
        trimmed = trim(entry.workflow, client_for(entry, profile), entry.toolset).workflow
        assert enumerate_paths(trimmed).count < full


class TestAuditDefects:
    @pytest.fixture
    def setup(self, update_address):
        client = client_for(update_address, make_profile("PREMIUM"))
        trimmed = trim(update_address.workflow, client, update_address.toolset).workflow
        return update_address.workflow, trimmed, client

    @staticmethod
    def swap_step(w, label, step):
        def rebuild(steps):
            out = []
            for s in steps:
                if s.label == label:
                    out.append(step)
                else:
                    out.append(replace(s, branches=tuple(replace(b, body=rebuild(b.body)) for b in s.branches)))
            return tuple(out)

        return replace(w, steps=rebuild(w.steps))

    def test_surviving_info_call(self, setup):
        original, trimmed, client = setup
        lookup = Action(
            ActionKind.TOOL_CALL, tool="get_account_type_extra", args=(("customer_id", ArgExpr.attr("customer_id")),)
        )
        step1 = trimmed.find("1")
        defective = self.swap_step(trimmed, "1", replace(step1, actions=(lookup,) + step1.actions))

        result = audit(defective, original, client)

        assert result.relevance == 4
        assert result.completeness == 5
        assert any("get_account_type_extra" in finding for finding in result.findings)

    def test_dead_branch_kept(self, setup):
        original, trimmed, client = setup
        step4 = replace(trimmed.find("4"), branches=original.find("4").branches)

        result = audit(self.swap_step(trimmed, "4", step4), original, client)

        assert result.relevance == 4
        assert result.completeness == 5

    def test_missing_outcome_branch(self, setup):
        original, trimmed, client = setup
        step2 = replace(trimmed.find("2"), branches=())

        result = audit(self.swap_step(trimmed, "2", step2), original, client)

        assert result.relevance == 5
        assert result.completeness < 5

    def test_content_after_close(self, setup):
        original, trimmed, client = setup
        step1 = trimmed.find("1")
        (branch,) = step1.branches
        longer = replace(branch, body=branch.body + (Step("1.2", prose="Anything else?"),))

        result = audit(self.swap_step(trimmed, "1", replace(step1, branches=(longer,))), original, client)

        assert result.relevance == 4
        assert result.completeness == 5

    def test_missing_required_tool(self, setup):
        original, trimmed, client = setup
        step3 = trimmed.find("3")
        no_update = replace(step3, prose="Skip the update", actions=(), branches=())

        result = audit(self.swap_step(trimmed, "3", no_update), original, client)

        assert result.relevance == 5
        assert result.completeness <= 3

    def test_missing_terminal(self, setup):
        original, trimmed, client = setup
        step6 = trimmed.find("6")
        no_close = replace(step6, actions=tuple(a for a in step6.actions if a.tool != "complete_case"))

        result = audit(self.swap_step(trimmed, "6", no_close), original, client)

        assert (result.relevance, result.completeness) == (5, 4)
        assert "workflow can end without closing the case" in result.findings

    def test_missing_must_always_step(self, catalog):
        entry = catalog.intent("processPayment")
        for profile in generate_profiles(entry.schema, PROFILES_PER_INTENT, 0, entry.utterances):
            client = client_for(entry, profile)
            trimmed = trim(entry.workflow, client, entry.toolset).workflow
            receipts = [s for s in trimmed.steps if any(a.tool == "issue_receipt" for a in s.actions)]
            if receipts:
                break
        else:
            pytest.fail("no processPayment profile reaches the receipt")
        defective = replace(trimmed, steps=tuple(s for s in trimmed.steps if s is not receipts[0]))

        result = audit(defective, entry.workflow, client)

        assert (result.relevance, result.completeness) == (5, 2)
        assert "must-always step 'issue_receipt' is missing" in result.findings


def test_inline_call_heading_is_named_by_its_tool(catalog):
    receipt = catalog.intent("processPayment").workflow.find("10")

    assert receipt.must_always and not receipt.prose
    assert step_key(receipt) == "issue_receipt"
    assert step_key(catalog.intent("bookFlight").workflow.find("1")).startswith("Ask ")
