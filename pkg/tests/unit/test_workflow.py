import pytest

from libraries.orchestration.catalog import FIXTURES_DIR
from libraries.workflow import (
    ActionKind,
    ConditionKind,
    WorkflowSyntaxError,
    WorkflowValidationError,
    decision_points,
    enumerate_paths,
    parse_workflow,
    serialize_workflow,
    token_count,
)

WORKFLOWS = sorted((FIXTURES_DIR / "workflows").glob("*.wf"))
HEADER = "@workflow demo domain=test intent=demo\n"


def read(path):
    return path.read_text(encoding="utf-8")


def test_update_address_shape(update_address):
    w = update_address.workflow

    assert len(w.steps) == 6
    step4 = w.find("4")
    (branch,) = step4.branches
    assert branch.condition.kind is ConditionKind.ATTR_EQUALS
    assert branch.condition.subject == "client_level"
    assert branch.condition.value == "STANDARD"
    assert w.find("4.1").actions[0].tool == "apply_address_hold"
    assert decision_points(w) == 6


@pytest.mark.parametrize("path", WORKFLOWS, ids=lambda p: p.stem)
def test_fixture_round_trip(path):
    w = parse_workflow(read(path))
    text = serialize_workflow(w)

    assert parse_workflow(text) == w
    assert serialize_workflow(parse_workflow(text)) == text


def test_single_terminal_step():
    w = parse_workflow(HEADER + "1. Call `complete_case(customer_id)`\n")

    assert w.steps[0].actions[0].kind is ActionKind.TERMINAL
    assert serialize_workflow(w).splitlines() == [
        "@workflow demo domain=test intent=demo",
        "1. Call `complete_case(customer_id)`",
    ]
    assert token_count(w) == 3


def test_nested_indentation():
    source = HEADER + (
        "1. Outer\n"
        "  * If a == 1:\n"
        "    1.1. Middle\n"
        "      * If b == 2:\n"
        "        1.1.1. Inner\n"
        "          * If c == 3:\n"
        "            1.1.1.1. Call `notify(customer_id)`\n"
        "2. Call `complete_case(customer_id)`\n"
    )
    lines = serialize_workflow(parse_workflow(source)).splitlines()

    assert "            1.1.1.1. Call `notify(customer_id)`" in lines


def test_token_count_is_additive():
    one = parse_workflow(HEADER + '1. Greet\n  - Say "hello there"\n2. Call `complete_case(customer_id)`\n')
    two = parse_workflow(
        HEADER + '1. Greet\n  - Say "hello there"\n  - Say "hello there"\n2. Call `complete_case(customer_id)`\n'
    )

    assert token_count(two) - token_count(one) == 4


def test_empty_workflow_has_no_terminal():
    with pytest.raises(WorkflowValidationError, match="no terminal"):
        parse_workflow(HEADER)


def test_goto_undefined_label():
    with pytest.raises(WorkflowValidationError, match="undefined"):
        parse_workflow(HEADER + "1. Jump\n  - Go to step 9\n2. Call `complete_case(customer_id)`\n")


def test_duplicate_step_id():
    with pytest.raises(WorkflowValidationError):
        parse_workflow(HEADER + "1. One\n1. Again\n2. Call `complete_case(customer_id)`\n")


def test_unresolved_tool():
    with pytest.raises(WorkflowValidationError, match="unresolved tool"):
        parse_workflow(
            HEADER + "1. Call `ghost(customer_id)`\n2. Call `complete_case(customer_id)`\n",
            tool_names={"complete_case"},
        )


def test_syntax_error_position():
    with pytest.raises(WorkflowSyntaxError) as info:
        parse_workflow(HEADER + "1. Step\n  - Frobnicate everything\n")

    assert info.value.line == 3
    assert info.value.col == 3


def test_branch_depth_limit():
    source = HEADER + (
        "1. Outer\n"
        "  * If a == 1:\n"
        "    1.1. Inner\n"
        "      * If b == 2:\n"
        "        1.1.1. Call `notify(customer_id)`\n"
        "2. Call `complete_case(customer_id)`\n"
    )
    parse_workflow(source, max_depth=2)
    with pytest.raises(WorkflowValidationError, match="depth"):
        parse_workflow(source, max_depth=1)


def test_linear_workflow_has_one_path():
    w = parse_workflow(
        HEADER
        + "1. Call `first(customer_id)`\n2. Call `second(customer_id)`\n3. Call `complete_case(customer_id)`\n"
    )

    paths = enumerate_paths(w)

    assert paths.paths == (("first", "second", "complete_case"),)
    assert not paths.truncated


@pytest.mark.parametrize("n", [1, 3, 10])
def test_independent_branches_multiply(synthetic, n):
    assert enumerate_paths(synthetic(n)).count == 2**n


def test_path_cap_truncates(synthetic):
    paths = enumerate_paths(synthetic(4), cap=5)

    assert paths.count == 5
    assert paths.truncated
    assert len(set(paths.paths)) == 5


def test_cap_must_be_positive(synthetic):
    with pytest.raises(ValueError):
        enumerate_paths(synthetic(1), cap=0)
