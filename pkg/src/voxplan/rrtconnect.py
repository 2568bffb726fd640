"""RRT-Connect baseline: two greedy trees, first feasible path wins.

Standard alternating scheme: extend one tree a single step toward a random
sample, then greedily connect the other tree toward the new node in
step-sized increments until it arrives or collides. No optimization pass
follows; the planner returns the first feasible path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import INF, Path, distance
from .planning import Improvement, PlannerProblem, PlanResult, Stopwatch, Termination
from .sampling import sample_uniform
from .validity import is_motion_valid


@dataclass(frozen=True)
class RrtConnectConfig:
    """step_size defaults to 5% of the bounds diagonal when unset."""

    step_size: float | None = None
    goal_tolerance: float | None = None

    def __post_init__(self):
        if self.step_size is not None and self.step_size <= 0:
            raise ValueError("step_size must be positive")


class _RrtNode:
    __slots__ = ("state", "parent")

    def __init__(self, state: np.ndarray, parent=None):
        self.state = state
        self.parent = parent


class _RrtTree:
    def __init__(self, root_state: np.ndarray, dim: int):
        self.nodes = [_RrtNode(root_state)]
        self._coords = np.empty((256, dim))
        self._coords[0] = root_state

    def __len__(self) -> int:
        return len(self.nodes)

    def add(self, state: np.ndarray, parent: _RrtNode) -> _RrtNode:
        node = _RrtNode(state, parent)
        n = len(self.nodes)
        if n == self._coords.shape[0]:
            self._coords = np.vstack([self._coords, np.empty_like(self._coords)])
        self._coords[n] = state
        self.nodes.append(node)
        return node

    def nearest(self, state: np.ndarray) -> _RrtNode:
        d = np.linalg.norm(self._coords[:len(self.nodes)] - state, axis=1)
        return self.nodes[int(np.argmin(d))]


class RrtConnectPlanner:
    planner_id = "rrtconnect"

    def __init__(self, problem: PlannerProblem, config: RrtConnectConfig | None = None):
        problem.check_endpoints()
        self.problem = problem
        cfg = config or RrtConnectConfig()
        self.step_size = cfg.step_size or 0.05 * problem.world.bounds.diagonal()
        self.goal_tolerance = (cfg.goal_tolerance if cfg.goal_tolerance is not None
                               else problem.goal_tolerance)
        self.iteration = 0

    def _motion_ok(self, a: np.ndarray, b: np.ndarray) -> bool:
        p = self.problem
        return is_motion_valid(p.world, p.shape, p.validity, a, b)

    def _extend(self, tree: _RrtTree, target: np.ndarray):
        """One bounded step toward target; returns (node, reached_target)."""
        near = tree.nearest(target)
        d = distance(near.state, target)
        if d <= self.step_size:
            new_state = target.copy()
            reached = True
        else:
            new_state = near.state + (target - near.state) * (self.step_size / d)
            reached = False
        if not self._motion_ok(near.state, new_state):
            return None, False
        return tree.add(new_state, near), reached

    def _connect(self, tree: _RrtTree, target: np.ndarray):
        """Greedy repeated extension toward target until arrival or collision."""
        while True:
            node, reached = self._extend(tree, target)
            if node is None:
                return None
            if reached:
                return node

    def plan(self, termination: Termination) -> PlanResult:
        watch = Stopwatch()
        p = self.problem
        start_tree = _RrtTree(p.x_start, p.world.dim)
        goal_tree = _RrtTree(p.x_goal, p.world.dim)
        tree_a, tree_b = start_tree, goal_tree
        path = None

        while not termination.done(watch.elapsed(), self.iteration, INF):
            self.iteration += 1
            if self.iteration == 1:
                # trivially close queries connect immediately
                if (distance(p.x_start, p.x_goal) <= self.step_size
                        and self._motion_ok(p.x_start, p.x_goal)):
                    path = Path.from_states([p.x_start, p.x_goal])
                    break
            q_rand = sample_uniform(p.world.bounds, p.rng)
            node_a, _ = self._extend(tree_a, q_rand)
            if node_a is not None:
                node_b = self._connect(tree_b, node_a.state)
                if node_b is not None:
                    path = self._assemble(start_tree, node_a, node_b, tree_a)
                    break
            tree_a, tree_b = tree_b, tree_a

        improvements = []
        if path is not None:
            improvements.append(Improvement(iteration=self.iteration,
                                            time_s=watch.elapsed(),
                                            cost=path.cost, path=path))
        return PlanResult(success=path is not None, path=path,
                          improvements=improvements, iterations=self.iteration,
                          elapsed_s=watch.elapsed())

    def _assemble(self, start_tree: _RrtTree, node_a, node_b, tree_a) -> Path:
        """Chain both trees through the meeting state (shared by both)."""
        if tree_a is start_tree:
            from_start, from_goal = node_a, node_b
        else:
            from_start, from_goal = node_b, node_a
        states = []
        node = from_start
        while node is not None:
            states.append(node.state)
            node = node.parent
        states.reverse()
        node = from_goal
        while node is not None:
            if distance(states[-1], node.state) > 0.0:
                states.append(node.state)
            node = node.parent
        return Path.from_states(states)
