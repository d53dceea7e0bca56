import json
import random
from itertools import combinations

import pytest

from libraries.datagen.ground_truth import generate_ground_truth
from libraries.metrics import (
    HEADERS,
    MixedSeeds,
    PerturbSpec,
    RunReport,
    aggregate,
    agent_match,
    build_report,
    check_seeds,
    exact_match,
    lcs_length,
    lcs_tools,
    param_match,
    perturb,
    prf,
    tool_prf,
    write_csv,
    write_json,
)
from libraries.orchestration import (
    AUTHENTICATOR,
    FULFILLMENT,
    ORCHESTRATOR,
    AgentEvent,
    Engine,
    EngineConfig,
    EventKind,
    Trajectory,
)

from .conftest import make_profile


def transitions(*pairs):
    trajectory = Trajectory("s", 1, "warpp", 0)
    trajectory.extend(AgentEvent(EventKind.AGENT_TRANSITION, agent, source=source) for source, agent in pairs)
    return trajectory


def report(mode="warpp", seed=0, exact=1, relevance=None):
    return RunReport(
        intent="updateAddress",
        mode=mode,
        profile_id=1,
        seed=seed,
        exact_match=exact,
        agent_match_ordered=100.0,
        agent_match_any=100.0,
        lcs_tools=100.0,
        tool_precision=100.0,
        tool_recall=100.0,
        tool_f1=100.0,
        fulfillment_tool_precision=100.0,
        fulfillment_tool_recall=100.0,
        fulfillment_tool_f1=100.0,
        param_match=100.0,
        tokens=1000,
        latency_ms=900,
        fulfillment_latency_ms=400,
        relevance=relevance,
    )


@pytest.fixture(scope="module")
def ground_truth(catalog):
    engine = Engine(catalog, EngineConfig(deterministic_tools=True))
    return generate_ground_truth(make_profile(), "warpp", 0, engine).trajectory


@pytest.mark.parametrize(
    "pred, gt, expected",
    [
        (["a", "b", "c"], ["a", "c"], 100.0),
        (["b", "a"], ["a", "b"], 50.0),
        ([], ["a"], 0.0),
        ([], [], 100.0),
    ],
)
def test_lcs_tools(pred, gt, expected):
    assert lcs_tools(pred, gt) == expected


def is_subsequence(sub, seq):
    remaining = iter(seq)
    return all(item in remaining for item in sub)


def longest_common_by_search(a, b):
    for size in range(min(len(a), len(b)), 0, -1):
        if any(is_subsequence(sub, b) for sub in combinations(a, size)):
            return size
    return 0


def random_sequence(rng, alphabet="abcd", longest=8):
    return [rng.choice(alphabet) for _ in range(rng.randint(0, longest))]


def test_lcs_matches_exhaustive_search():
    rng = random.Random(11)
    for _ in range(1000):
        a, b = random_sequence(rng), random_sequence(rng)
        assert lcs_length(a, b) == longest_common_by_search(a, b), (a, b)


def random_transitions(rng):
    agents = [ORCHESTRATOR, AUTHENTICATOR, FULFILLMENT]
    return transitions(*[(rng.choice(agents), rng.choice(agents)) for _ in range(rng.randint(0, 6))])


def test_ordered_scores_never_exceed_multiset_scores():
    rng = random.Random(3)
    for _ in range(200):
        pred, gt = random_sequence(rng), random_sequence(rng)
        assert lcs_tools(pred, gt) <= tool_prf(pred, gt).recall

        ordered, any_order = agent_match(random_transitions(rng), random_transitions(rng))
        assert ordered <= any_order


def test_prf():
    assert prf(["a", "b"], ["a", "c"]) == (50.0, 50.0, 50.0)
    assert prf([], ["a"]) == (0.0, 0.0, 0.0)
    assert prf(["a"], []).f1 == 0.0
    assert prf([], []) == (100.0, 100.0, 100.0)


def test_prf_counts_duplicates():
    assert prf(["a", "a"], ["a"]).precision == 50.0
    assert prf(["a"], ["a", "a"]).recall == 50.0


def test_param_match_counts_pairs():
    gt = [("update_address", {"customer_id": 1, "address": {"street": "1 Main St", "city": "Raleigh"}})]
    pred = [("update_address", {"customer_id": 1, "address": {"street": "1 Main St", "city": "Durham"}})]

    assert param_match(pred, gt) == pytest.approx(200 / 3)
    assert param_match(gt, gt) == 100.0


def test_param_match_aligns_by_tool():
    gt = [("a", {"x": 1}), ("b", {"y": 2})]
    pred = [("b", {"y": 2}), ("c", {"x": 1})]

    assert param_match(pred, gt) == 50.0


def test_agent_match():
    gt = transitions((ORCHESTRATOR, AUTHENTICATOR), (AUTHENTICATOR, FULFILLMENT))
    pred = transitions((ORCHESTRATOR, AUTHENTICATOR))

    assert agent_match(pred, gt) == (50.0, 50.0)
    assert agent_match(gt, gt) == (100.0, 100.0)


def test_agent_match_order():
    gt = transitions((ORCHESTRATOR, AUTHENTICATOR), (AUTHENTICATOR, FULFILLMENT))
    pred = transitions((AUTHENTICATOR, FULFILLMENT), (ORCHESTRATOR, AUTHENTICATOR))

    ordered, any_order = agent_match(pred, gt)

    assert ordered == 50.0
    assert any_order == 100.0


def test_identity_perturbation(ground_truth):
    copy = perturb(ground_truth, PerturbSpec(), seed=1)

    assert copy is not ground_truth
    assert exact_match(copy, ground_truth) == 1
    assert lcs_tools(copy, ground_truth) == 100.0
    assert param_match(copy, ground_truth) == 100.0


def test_drop_every_tool(ground_truth):
    dropped = perturb(ground_truth, PerturbSpec(drop_tool=1.0), seed=1)

    assert dropped.tool_names() == []
    assert tool_prf(dropped, ground_truth).recall == 0.0
    assert lcs_tools(dropped, ground_truth) == 0.0
    assert dropped.transitions() == ground_truth.transitions()


def test_swap_keeps_the_tool_multiset(ground_truth):
    swapped = perturb(ground_truth, PerturbSpec(swap_adjacent=1.0), seed=1)

    assert tool_prf(swapped, ground_truth).f1 == 100.0
    assert exact_match(swapped, ground_truth) == 0
    assert lcs_tools(swapped, ground_truth) < 100.0


def test_corrupted_params(ground_truth):
    corrupted = perturb(ground_truth, PerturbSpec(corrupt_param=1.0), seed=1)

    assert exact_match(corrupted, ground_truth) == 1
    assert param_match(corrupted, ground_truth) < 100.0


def test_hallucinated_tools_cost_precision(ground_truth):
    noisy = perturb(ground_truth, PerturbSpec(hallucinate_tool=1.0), seed=1)
    scores = tool_prf(noisy, ground_truth)

    assert scores.recall == 100.0
    assert scores.precision == 50.0


def test_perturbation_is_seeded(ground_truth):
    spec = PerturbSpec(drop_tool=0.3, swap_adjacent=0.3)

    assert perturb(ground_truth, spec, 5).to_jsonl() == perturb(ground_truth, spec, 5).to_jsonl()


RATES = (0.0, 0.1, 0.3, 0.6, 1.0)


def test_metric_identities_hold_under_perturbation(ground_truth):
    rng = random.Random(5)
    for seed in range(200):
        spec = PerturbSpec(
            drop_tool=rng.choice(RATES) / 2,
            swap_adjacent=rng.choice(RATES) / 2,
            corrupt_param=rng.choice(RATES),
            hallucinate_tool=rng.choice(RATES) / 2,
        )
        pred = perturb(ground_truth, spec, seed)
        lcs, recall = lcs_tools(pred, ground_truth), tool_prf(pred, ground_truth).recall
        ordered, any_order = agent_match(pred, ground_truth)

        assert lcs <= recall
        assert ordered <= any_order
        if exact_match(pred, ground_truth):
            assert lcs == recall == 100.0
            assert tool_prf(pred, ground_truth).f1 == 100.0
            assert tool_prf(pred, ground_truth, "fulfillment").f1 == 100.0
            assert (ordered, any_order) == (100.0, 100.0)


def test_dropping_more_tools_never_raises_recall(ground_truth):
    for seed in range(20):
        runs = [perturb(ground_truth, PerturbSpec(drop_tool=rate), seed) for rate in RATES]
        recalls = [tool_prf(run, ground_truth).recall for run in runs]
        lcs = [lcs_tools(run, ground_truth) for run in runs]

        assert recalls == sorted(recalls, reverse=True)
        assert lcs == sorted(lcs, reverse=True)
        assert (recalls[0], recalls[-1]) == (100.0, 0.0)


def test_perturb_spec_validation():
    with pytest.raises(ValueError):
        PerturbSpec(drop_tool=1.5)
    with pytest.raises(ValueError, match="Unknown perturbation"):
        PerturbSpec.from_dict({"shuffle": 0.1})


def test_build_report_of_ground_truth(ground_truth):
    run = build_report(ground_truth, ground_truth)

    assert run.exact_match == 1
    assert run.param_match == 100.0
    assert run.tokens == ground_truth.tokens
    assert run.relevance is None


def test_aggregate():
    rows = aggregate([report(exact=1, relevance=5), report(exact=0, relevance=3), report(mode="react")])

    assert [row["Strategy"] for row in rows] == ["React", "Warpp"]
    warpp = rows[1]
    assert warpp["Runs"] == 2
    assert warpp["Exact Match"] == 0.5
    assert warpp["Rel. Avg"] == 4.0
    assert warpp["Rel. Std"] == 1.0
    assert rows[0]["Rel. Avg"] is None


def test_aggregate_needs_reports():
    with pytest.raises(ValueError):
        aggregate([])


def test_check_seeds():
    assert check_seeds([report(seed=4), report(seed=4)]) == 4
    with pytest.raises(MixedSeeds):
        check_seeds([report(seed=0), report(seed=1)])


def test_written_tables(tmp_path):
    rows = aggregate([report(exact=1), report(exact=0), report(exact=0)])

    csv_path = write_csv(rows, tmp_path / "results.csv")
    json_path = write_json(rows, tmp_path / "results.json", meta={"seed": 0})

    header, line = csv_path.read_text(encoding="utf-8").splitlines()
    assert header.split(",") == list(HEADERS)
    assert ",0.33," in line
    document = json.loads(json_path.read_text(encoding="utf-8"))
    assert document["meta"] == {"seed": 0}
    assert document["rows"][0]["Exact Match"] == 0.33
