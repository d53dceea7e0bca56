"""
Robot Framework library for scoring trajectories.
"""

from typing import Any, Dict, List, Optional

from robot.api import logger
from robot.api.deco import keyword

from libraries.orchestration import Trajectory

from .adherence import score, scores_to_dict
from .perturb import PerturbSpec, perturb
from .report import RunReport, aggregate, build_report, round_rows


class MetricsLibrary:
    """
    Keywords for comparing a predicted trajectory with its ground truth.

    Scores of the last comparison are kept for the assertion keywords.
    """

    ROBOT_LIBRARY_SCOPE = "GLOBAL"
    ROBOT_LIBRARY_VERSION = "1.0.0"

    def __init__(self):
        self.scores: Optional[Dict[str, float]] = None
        self.reports: List[RunReport] = []

    @staticmethod
    def _load(trajectory: Any) -> Trajectory:
        if isinstance(trajectory, Trajectory):
            return trajectory
        return Trajectory.read(trajectory)

    def _scores(self) -> Dict[str, float]:
        if self.scores is None:
            raise AssertionError("No trajectories have been compared yet")
        return self.scores

    @keyword("Perturb Trajectory")
    def perturb_trajectory(self, trajectory: Any, seed: int = 0, **probabilities: float) -> Trajectory:
        """
        Inject adherence errors into a copy of a trajectory.

        Args:
            trajectory: Trajectory or path to a JSONL log
            seed: Perturbation seed
            probabilities: drop_tool, swap_adjacent, corrupt_param, hallucinate_tool

        Example:
            | ${pred}= | Perturb Trajectory | ${gt} | 3 | swap_adjacent=1.0 |
        """
        spec = PerturbSpec.from_dict(probabilities)
        return perturb(self._load(trajectory), spec, int(seed))

    @keyword("Compare Trajectories")
    def compare_trajectories(self, predicted: Any, ground_truth: Any) -> Dict[str, float]:
        """
        Score a prediction and remember the result.

        Returns:
            Dictionary of metric name to value

        Example:
            | ${scores}= | Compare Trajectories | ${pred} | ${gt} |
        """
        pred, gt = self._load(predicted), self._load(ground_truth)
        self.scores = scores_to_dict(score(pred, gt))
        self.reports.append(build_report(pred, gt))
        logger.info(f"Scores: {self.scores}")
        return self.scores

    @keyword("Metric Should Be")
    def metric_should_be(self, name: str, expected: float, tolerance: float = 0.01):
        """
        Example:
            | Metric Should Be | lcs_tools | 100 |
        """
        scores = self._scores()
        if name not in scores:
            raise AssertionError(f"Unknown metric {name}; known: {', '.join(sorted(scores))}")
        if abs(scores[name] - float(expected)) > float(tolerance):
            raise AssertionError(f"{name} is {scores[name]}, expected {expected}")

    @keyword("Metric Should Be Below")
    def metric_should_be_below(self, name: str, limit: float):
        value = self._scores()[name]
        if value >= float(limit):
            raise AssertionError(f"{name} is {value}, expected below {limit}")

    @keyword("Get Aggregated Table")
    def get_aggregated_table(self) -> List[Dict[str, Any]]:
        """Rows of every comparison made so far, grouped by intent and strategy."""
        return round_rows(aggregate(self.reports))

    @keyword("Reset Reports")
    def reset_reports(self):
        self.reports = []
        self.scores = None
