"""Shared planner plumbing: problem definition, termination, results."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import INF, Path, RandomSource
from .sampling import BatchParams
from .validity import RobotShape, ValidityConfig, World, is_state_valid


@dataclass
class PlannerProblem:
    world: World
    shape: RobotShape
    validity: ValidityConfig
    x_start: np.ndarray
    x_goal: np.ndarray
    goal_tolerance: float = 0.0
    batch: BatchParams = field(default_factory=BatchParams)
    rng: RandomSource = None

    def __post_init__(self):
        if self.goal_tolerance < 0:
            raise ValueError("goal_tolerance must be non-negative")
        if self.rng is None:
            raise ValueError("problem needs an explicit random source")

    def check_endpoints(self) -> None:
        if not is_state_valid(self.world, self.shape, self.validity, self.x_start):
            raise ValueError("start state is invalid")
        if not is_state_valid(self.world, self.shape, self.validity, self.x_goal):
            raise ValueError("goal state is invalid")


@dataclass(frozen=True)
class Termination:
    """Stop on whichever budget is exhausted first, or on target cost."""

    time_budget_s: float | None = None
    max_iterations: int | None = None
    target_cost: float | None = None

    def done(self, elapsed_s: float, iterations: int, best_cost: float) -> bool:
        if self.time_budget_s is not None and elapsed_s >= self.time_budget_s:
            return True
        if self.max_iterations is not None and iterations >= self.max_iterations:
            return True
        if self.target_cost is not None and best_cost <= self.target_cost:
            return True
        return False


@dataclass
class Improvement:
    """One emitted anytime solution."""

    iteration: int
    time_s: float
    cost: float
    path: Path


@dataclass
class PlanResult:
    success: bool
    path: Path | None
    improvements: list[Improvement]
    iterations: int
    elapsed_s: float

    @property
    def cost(self) -> float:
        return self.path.cost if self.path is not None else INF

    @property
    def first(self) -> Improvement | None:
        return self.improvements[0] if self.improvements else None


class Stopwatch:
    def __init__(self):
        self.t0 = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0


def finite_or_none(x: float) -> float | None:
    return x if math.isfinite(x) else None
