"""
Seeded adherence-error injection.

Turns a ground-truth trajectory into a plausible faulty prediction by
dropping tool calls, swapping neighbouring calls, corrupting a parameter or
inserting calls to tools that do not exist. Only tool invocations are
touched; agent transitions and utterances are left as they were.
"""

import random
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, List, Mapping

from libraries.orchestration import AgentEvent, Trajectory
from libraries.workflow import assign, flatten

CORRUPTED = "corrupted"
HALLUCINATED_PREFIX = "hallucinated_tool_"


@dataclass(frozen=True)
class PerturbSpec:
    drop_tool: float = 0.0
    swap_adjacent: float = 0.0
    corrupt_param: float = 0.0
    hallucinate_tool: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{f.name} must be a probability, got {value}")

    @property
    def is_identity(self) -> bool:
        return not any(getattr(self, f.name) for f in fields(self))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PerturbSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown perturbation: {', '.join(sorted(unknown))}")
        return cls(**{name: float(value) for name, value in data.items()})

    def to_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _swap(a: AgentEvent, b: AgentEvent):
    moved = dict(tool=b.tool, params=b.params, outcome=b.outcome)
    return replace(a, **moved), replace(b, tool=a.tool, params=a.params, outcome=a.outcome)


def _corrupt(params: Mapping[str, Any], rng: random.Random) -> Dict[str, Any]:
    flat = flatten(params)
    if not flat:
        return dict(params)
    key = rng.choice(sorted(flat))
    flat[key] = CORRUPTED
    rebuilt: Dict[str, Any] = {}
    for path, value in flat.items():
        assign(rebuilt, path, value)
    return rebuilt


def perturb(gt: Trajectory, spec: PerturbSpec, seed: int = 0) -> Trajectory:
    """
    Perturbed copy of a trajectory; the original is left untouched.

    Args:
        gt: Ground-truth trajectory
        spec: Per-call probability of each kind of error
        seed: Seed of the perturbation draws
    """
    if spec.is_identity:
        return replace(gt, events=list(gt.events))
    rng = random.Random(seed)
    events: List[AgentEvent] = list(gt.events)

    if spec.drop_tool:
        events = [e for e in events if not (e.is_tool and rng.random() < spec.drop_tool)]

    if spec.swap_adjacent:
        positions = [i for i, e in enumerate(events) if e.is_tool]
        k = 0
        while k < len(positions) - 1:
            i, j = positions[k], positions[k + 1]
            if events[i].tool != events[j].tool and rng.random() < spec.swap_adjacent:
                events[i], events[j] = _swap(events[i], events[j])
                k += 2
            else:
                k += 1

    if spec.corrupt_param:
        events = [
            replace(e, params=_corrupt(e.params, rng))
            if e.is_tool and e.params and rng.random() < spec.corrupt_param
            else e
            for e in events
        ]

    if spec.hallucinate_tool:
        noisy: List[AgentEvent] = []
        invented = 0
        for e in events:
            noisy.append(e)
            if e.is_tool and rng.random() < spec.hallucinate_tool:
                noisy.append(
                    replace(e, tool=f"{HALLUCINATED_PREFIX}{invented}", params={}, outcome=None)
                )
                invented += 1
        events = noisy

    perturbed = replace(gt, events=[])
    perturbed.extend(events)
    return perturbed
