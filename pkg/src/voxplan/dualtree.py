"""Bidirectional batch-informed search with switched connection tactics.

Two batch trees grow toward each other, one rooted at the start and one at
the goal. Neither tree tests its own samples for goal membership; the only
way the incumbent improves is an explicit tree-to-tree connection. Each
iteration both trees advance one step, then a connection is attempted from
the most recently grown vertex of each tree to the other tree, targeting
either the nearest or a uniformly random vertex. The tactic is drawn fresh
every attempt round from a configured probability.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bitstar import BatchTree, Node
from .geometry import INF, Path, distance, draw_uniform
from .planning import Improvement, PlannerProblem, PlanResult, Stopwatch, Termination
from .validity import is_motion_valid


class ConnectionStrategy(Enum):
    NEAREST = "nearest"
    RANDOM = "random"


@dataclass(frozen=True)
class StrategyConfig:
    """Probability of targeting the nearest vertex on the opposite tree."""

    p_nearest: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.p_nearest <= 1.0:
            raise ValueError("p_nearest must lie in [0, 1]")


@dataclass
class ConnectionAttempt:
    strategy: ConnectionStrategy
    source: np.ndarray
    target: np.ndarray
    succeeded: bool
    cost: float
    iteration: int


def strategy_nearest(source: np.ndarray, other: BatchTree) -> Node:
    """Closest vertex of the other tree; ties fall to the earliest insertion."""
    n = len(other.vertices)
    d = np.linalg.norm(other._v_coords[:n] - source, axis=1)
    return other.vertices[int(np.argmin(d))]


def strategy_random(other: BatchTree, rng) -> Node:
    """Uniformly random vertex of the other tree."""
    return other.vertices[int(rng.integers(len(other.vertices)))]


class DualBitStarPlanner:
    """Anytime bidirectional batch-informed planner."""

    planner_id = "2bit"

    def __init__(self, problem: PlannerProblem,
                 strategy: StrategyConfig | None = None,
                 audit_queues: bool = False, record_samples: bool = False):
        problem.check_endpoints()
        self.problem = problem
        self.strategy = strategy or StrategyConfig()
        self.tree1 = BatchTree(problem.x_start, problem.x_goal, problem,
                               track_goal_vertices=False, audit_queues=audit_queues)
        self.tree2 = BatchTree(problem.x_goal, problem.x_start, problem,
                               track_goal_vertices=False, audit_queues=audit_queues)
        if record_samples:
            self.tree1.sample_log = []
            self.tree2.sample_log = []
        self.best_cost = INF
        self.best_connection: tuple[Node, Node, float] | None = None
        self.connection_log: list[ConnectionAttempt] = []
        self.strategy_draws = {ConnectionStrategy.NEAREST: 0,
                               ConnectionStrategy.RANDOM: 0}
        self.iteration = 0

    # -- connection machinery -------------------------------------------

    def connect_trees(self) -> list[ConnectionAttempt]:
        """Attempt one connection per direction under a freshly drawn tactic.

        A success stores the joining edge, lowers the shared incumbent, and
        empties all four queues so both trees start a new batch next step.
        """
        r = draw_uniform(self.problem.rng)
        if r < self.strategy.p_nearest:
            tactic = ConnectionStrategy.NEAREST
        else:
            tactic = ConnectionStrategy.RANDOM
        self.strategy_draws[tactic] += 1

        attempts = []
        for source_tree, target_tree in ((self.tree1, self.tree2),
                                         (self.tree2, self.tree1)):
            if not source_tree.vertex_added_since_connect:
                continue
            u = source_tree.most_recent_vertex
            source_tree.vertex_added_since_connect = False
            if u is None:
                continue
            if tactic == ConnectionStrategy.NEAREST:
                w = strategy_nearest(u.state, target_tree)
            else:
                w = strategy_random(target_tree, self.problem.rng)
            c_edge = distance(u.state, w.state)
            total = u.cost + c_edge + w.cost
            p = self.problem
            valid = is_motion_valid(p.world, p.shape, p.validity, u.state, w.state)
            succeeded = valid and total < self.best_cost
            if succeeded:
                if source_tree is self.tree1:
                    self._adopt_connection(u, w, c_edge, total)
                else:
                    self._adopt_connection(w, u, c_edge, total)
            attempts.append(ConnectionAttempt(
                strategy=tactic, source=u.state, target=w.state,
                succeeded=succeeded, cost=total if succeeded else INF,
                iteration=self.iteration))
        self.connection_log.extend(attempts)
        return attempts

    def _adopt_connection(self, node1: Node, node2: Node, c_edge: float,
                          total: float) -> None:
        self.best_connection = (node1, node2, c_edge)
        self.best_cost = total
        self.tree1.incumbent = total
        self.tree2.incumbent = total
        self.tree1.protected_tip = node1
        self.tree2.protected_tip = node2
        self.tree1.clear_queues()
        self.tree2.clear_queues()

    def _refresh_best_cost(self) -> None:
        """Track rewiring of the stored connection's endpoints."""
        if self.best_connection is None:
            return
        node1, node2, c_edge = self.best_connection
        total = node1.cost + c_edge + node2.cost
        if total < self.best_cost - 1e-12:
            self.best_cost = total
            self.tree1.incumbent = total
            self.tree2.incumbent = total

    # -- planning loop -----------------------------------------------------

    def step(self) -> float | None:
        """One iteration; returns the new best cost if it improved."""
        self.iteration += 1
        before = self.best_cost
        self.tree1.step(self.iteration)
        self.tree2.step(self.iteration)
        self.connect_trees()
        self._refresh_best_cost()
        if self.best_cost < before:
            return self.best_cost
        return None

    def extract_solution(self) -> Path:
        """Join the two root chains through the stored connection edge."""
        if self.best_connection is None:
            raise RuntimeError("no tree-to-tree connection found yet")
        node1, node2, _ = self.best_connection
        states = node1.chain_states()
        back = node2.chain_states()
        back.reverse()
        for s in back:
            if states and distance(states[-1], s) == 0.0:
                continue
            states.append(s)
        return Path.from_states(states)

    def plan(self, termination: Termination) -> PlanResult:
        watch = Stopwatch()
        improvements: list[Improvement] = []
        while not termination.done(watch.elapsed(), self.iteration, self.best_cost):
            improved = self.step()
            if improved is not None:
                improvements.append(Improvement(
                    iteration=self.iteration, time_s=watch.elapsed(),
                    cost=improved, path=self.extract_solution()))
        path = self.extract_solution() if self.best_connection is not None else None
        return PlanResult(success=path is not None, path=path,
                          improvements=improvements, iterations=self.iteration,
                          elapsed_s=watch.elapsed())
