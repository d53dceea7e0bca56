"""Errors raised while scoring runs."""

from typing import Iterable


class MetricsError(Exception):
    """Base class for scoring errors."""


class MixedSeeds(MetricsError):
    def __init__(self, seeds: Iterable[int]):
        self.seeds = sorted(set(seeds))
        super().__init__(f"Runs come from different seeds: {self.seeds}")


class MissingGroundTruth(MetricsError):
    def __init__(self, run: str):
        self.run = run
        super().__init__(f"No ground truth for run {run}")
