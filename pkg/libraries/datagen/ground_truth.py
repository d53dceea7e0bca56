"""
Ground-truth trajectories.

A ground truth is the reference executor's own run of a (profile, mode, seed)
triple. It is regenerated for every experimental run and stored as JSONL next
to the predicted trajectories it is scored against.

Lives outside the package ``__init__`` because it depends on orchestration,
which itself depends on the rest of datagen.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

from robot.api import logger

from libraries.orchestration import Engine, Mode, ReferenceBackend, Trajectory, read_meta

from .profiles import UserProfile


@dataclass(frozen=True)
class GroundTruth:
    profile_id: int
    mode: str
    seed: int
    trajectory: Trajectory

    def write(self, path: Union[str, Path], meta: Optional[Dict[str, Any]] = None) -> Path:
        meta = {**(meta or {}), "ground_truth": True}
        return self.trajectory.write(path, meta)

    @classmethod
    def read(cls, path: Union[str, Path]) -> "GroundTruth":
        if not read_meta(path).get("ground_truth"):
            raise ValueError(f"{path} is not a ground-truth log")
        trajectory = Trajectory.read(path)
        return cls(trajectory.profile_id, trajectory.mode, trajectory.seed, trajectory)


def generate_ground_truth(
    profile: UserProfile,
    mode: Union[Mode, str],
    seed: int,
    engine: Optional[Engine] = None,
) -> GroundTruth:
    """
    Run the reference executor end to end and keep its trajectory.

    Args:
        profile: Generated user profile
        mode: Mode the ground truth is recorded for
        seed: Run seed; tool outcomes are drawn from it
        engine: Engine to run with; its backend is replaced by the reference one

    Raises:
        ExecutorStuck, UnknownPrompt: The fixtures cannot carry this profile
    """
    engine = engine or Engine()
    mode = Mode.parse(mode)
    trajectory = engine.run_session(profile, mode, seed, backend=ReferenceBackend())
    logger.debug(
        f"Ground truth for {profile.customer_id} ({mode.label}, seed {seed}): "
        f"{trajectory.tool_names()}"
    )
    return GroundTruth(profile.customer_id, mode.value, seed, trajectory)
