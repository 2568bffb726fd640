"""Batch-informed tree search.

One `BatchTree` holds the per-tree machinery: samples arrive in pruned,
informed batches; a vertex queue orders lazy expansion and an edge queue
orders lazy collision evaluation, both keyed by admissible cost estimates.
`BitStarPlanner` drives a single tree from start to goal and doubles as
the single-tree baseline; the bidirectional planner reuses `BatchTree`
for both of its trees.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

from .geometry import INF, Path, distance
from .planning import Improvement, PlannerProblem, PlanResult, Stopwatch, Termination
from .sampling import ellipsoid_measure, sample_batch, unit_ball_measure
from .validity import is_motion_valid

RGG_ETA = 1.1

# heap entry layout: [key, cost_tiebreak, seq, ..., live]
_V_NODE, _V_LIVE = 3, 4
_E_SOURCE, _E_TARGET, _E_CHAT, _E_LIVE = 3, 4, 5, 6


def rgg_radius(q: int, measure: float, dim: int, eta: float = RGG_ETA) -> float:
    """Shrinking connection radius for q states over a domain of given measure."""
    if q < 2:
        return INF
    zeta = unit_ball_measure(dim)
    return eta * (2.0 * (1.0 + 1.0 / dim) * (measure / zeta)
                  * (math.log(q) / q)) ** (1.0 / dim)


class Node:
    __slots__ = ("state", "parent", "children", "cost", "cost_to_parent",
                 "lb_to_come", "lb_to_go", "in_tree", "unexpanded", "is_goal",
                 "tree_idx", "sample_idx", "vq_entry", "eq_entries")

    def __init__(self, state: np.ndarray, lb_to_come: float, lb_to_go: float,
                 is_goal: bool):
        self.state = state
        self.parent: Node | None = None
        self.children: list[Node] = []
        self.cost = INF
        self.cost_to_parent = 0.0
        self.lb_to_come = lb_to_come
        self.lb_to_go = lb_to_go
        self.in_tree = False
        self.unexpanded = False
        self.is_goal = is_goal
        self.tree_idx = -1
        self.sample_idx = -1
        self.vq_entry = None
        self.eq_entries: list = []

    def chain_states(self) -> list[np.ndarray]:
        """States from the tree root down to this node."""
        states = []
        node: Node | None = self
        while node is not None:
            states.append(node.state)
            node = node.parent
        states.reverse()
        return states


class BatchTree:
    """One rooted search tree with its sample set and lazy queues."""

    def __init__(self, root_state: np.ndarray, target_state: np.ndarray,
                 problem: PlannerProblem, track_goal_vertices: bool,
                 audit_queues: bool = False):
        self.problem = problem
        self.root_state = root_state
        self.target_state = target_state
        self.track_goal_vertices = track_goal_vertices
        self.foci_dist = distance(root_state, target_state)

        self.root = self._new_node(root_state)
        self.root.cost = 0.0
        self.root.in_tree = True
        self.vertices: list[Node] = []
        self.samples: list[Node] = []
        self.goal_nodes: list[Node] = []
        self.incumbent = INF
        self.radius = INF

        self.vertex_queue: list = []
        self.edge_queue: list = []
        self._seq = 0

        self.batches_started = 0
        self.last_batch_iteration: int | None = None
        self.most_recent_vertex: Node | None = self.root
        self.vertex_added_since_connect = True
        self.protected_tip: Node | None = None
        self.queue_audit: list[tuple[float, float]] | None = [] if audit_queues else None
        self.sample_log: list[tuple[float, list[np.ndarray]]] | None = None

        dim = problem.world.dim
        self._v_coords = np.empty((256, dim))
        self._v_cost = np.empty(256)
        self._v_lb_to_go = np.empty(256)
        self._append_vertex(self.root)

        # the opposite endpoint is seeded as the first unconnected sample
        self.samples.append(self._new_node(target_state.copy()))
        self._rebuild_sample_buffers()

    # -- node and buffer plumbing --------------------------------------

    def _new_node(self, state: np.ndarray) -> Node:
        lb_come = distance(self.root_state, state)
        lb_go = distance(state, self.target_state)
        return Node(state, lb_come, lb_go,
                    is_goal=lb_go <= self.problem.goal_tolerance)

    def _append_vertex(self, node: Node) -> None:
        n = len(self.vertices)
        if n == self._v_coords.shape[0]:
            self._v_coords = np.vstack([self._v_coords, np.empty_like(self._v_coords)])
            self._v_cost = np.concatenate([self._v_cost, np.empty_like(self._v_cost)])
            self._v_lb_to_go = np.concatenate([self._v_lb_to_go, np.empty_like(self._v_lb_to_go)])
        node.tree_idx = n
        self._v_coords[n] = node.state
        self._v_cost[n] = node.cost
        self._v_lb_to_go[n] = node.lb_to_go
        self.vertices.append(node)

    def _rebuild_vertex_buffers(self) -> None:
        nodes = self.vertices
        self.vertices = []
        for node in nodes:
            self._append_vertex(node)

    def _rebuild_sample_buffers(self) -> None:
        n = len(self.samples)
        dim = self.problem.world.dim
        self._s_coords = np.empty((n, dim))
        self._s_lb_to_go = np.empty(n)
        self._s_alive = np.ones(n, dtype=bool)
        for i, node in enumerate(self.samples):
            node.sample_idx = i
            self._s_coords[i] = node.state
            self._s_lb_to_go[i] = node.lb_to_go

    # -- queue plumbing --------------------------------------------------

    def _push_vertex(self, node: Node) -> None:
        key = node.cost + node.lb_to_go
        entry = [key, node.cost, self._seq, node, True]
        self._seq += 1
        node.vq_entry = entry
        heapq.heappush(self.vertex_queue, entry)

    def _push_edge(self, v: Node, x: Node, c_hat: float) -> None:
        key = v.cost + c_hat + x.lb_to_go
        if self.queue_audit is not None:
            self.queue_audit.append((key, self.incumbent))
        entry = [key, v.cost, self._seq, v, x, c_hat, True]
        self._seq += 1
        v.eq_entries.append(entry)
        heapq.heappush(self.edge_queue, entry)

    def best_vertex_key(self) -> float:
        q = self.vertex_queue
        while q and not q[0][_V_LIVE]:
            heapq.heappop(q)
        return q[0][0] if q else INF

    def best_edge_key(self) -> float:
        q = self.edge_queue
        while q and not q[0][_E_LIVE]:
            heapq.heappop(q)
        return q[0][0] if q else INF

    def queues_empty(self) -> bool:
        return self.best_vertex_key() == INF and self.best_edge_key() == INF

    def clear_queues(self) -> None:
        for entry in self.vertex_queue:
            entry[_V_LIVE] = False
            entry[_V_NODE].vq_entry = None
        for entry in self.edge_queue:
            entry[_E_LIVE] = False
        for node in self.vertices:
            node.eq_entries = []
        self.vertex_queue = []
        self.edge_queue = []

    def _rekey_node(self, node: Node) -> None:
        """Refresh queue entries whose key depends on node's cost-to-come."""
        entry = node.vq_entry
        if entry is not None and entry[_V_LIVE] and entry[0] != node.cost + node.lb_to_go:
            entry[_V_LIVE] = False
            self._push_vertex(node)
        if node.eq_entries:
            keep, stale = [], []
            for e in node.eq_entries:
                if not e[_E_LIVE]:
                    continue
                if e[0] == node.cost + e[_E_CHAT] + e[_E_TARGET].lb_to_go:
                    keep.append(e)
                else:
                    stale.append(e)
            node.eq_entries = keep
            for e in stale:
                e[_E_LIVE] = False
                self._push_edge(node, e[_E_TARGET], e[_E_CHAT])

    # -- batch lifecycle ---------------------------------------------------

    def start_new_batch(self, iteration: int) -> None:
        """Prune, draw a fresh informed batch, and requeue all vertices."""
        reusable = self.prune() if math.isfinite(self.incumbent) else []
        fresh = sample_batch(self.problem.batch.m, self.root_state,
                             self.target_state, self.incumbent,
                             self.problem.world.bounds, self.problem.rng)
        if self.sample_log is not None:
            self.sample_log.append((self.incumbent, fresh))
        self.samples = ([s for s in self.samples if not s.in_tree]
                        + reusable + [self._new_node(s) for s in fresh])
        self._rebuild_sample_buffers()
        self._rebuild_vertex_buffers()

        self.vertex_queue = []
        self.edge_queue = []
        for node in self.vertices:
            node.unexpanded = True
            node.eq_entries = []
            self._push_vertex(node)

        q = len(self.vertices) + len(self.samples)
        bounds_measure = self.problem.world.bounds.volume()
        if math.isfinite(self.incumbent):
            measure = min(bounds_measure,
                          ellipsoid_measure(self.incumbent, self.foci_dist,
                                            self.problem.world.dim))
        else:
            measure = bounds_measure
        self.radius = rgg_radius(q, measure, self.problem.world.dim)
        self.batches_started += 1
        self.last_batch_iteration = iteration

    def prune(self) -> list[Node]:
        """Drop states that cannot improve the incumbent.

        Samples over the cost bound are discarded; tree vertices over it
        are detached, and those still inside the informed set are demoted
        back to samples for reuse. Vertices on the incumbent solution are
        kept regardless.
        """
        bound = self.incumbent
        protected: set[int] = set()
        node = self.protected_tip
        while node is not None:
            protected.add(id(node))
            node = node.parent

        self.samples = [s for s in self.samples
                        if not s.in_tree and s.lb_to_come + s.lb_to_go <= bound]
        reusable: list[Node] = []

        def discard_subtree(top: Node) -> None:
            stack = [top]
            while stack:
                u = stack.pop()
                stack.extend(u.children)
                u.children = []
                u.parent = None
                u.in_tree = False
                u.vq_entry = None
                u.eq_entries = []
                u.tree_idx = -1
                u.sample_idx = -1
                if u.lb_to_come + u.lb_to_go <= bound:
                    u.cost = INF
                    u.cost_to_parent = 0.0
                    u.unexpanded = False
                    reusable.append(u)

        stack = [self.root]
        while stack:
            v = stack.pop()
            for child in list(v.children):
                f_lb = child.lb_to_come + child.lb_to_go
                removable = (f_lb > bound or child.cost + child.lb_to_go > bound)
                if removable and id(child) not in protected:
                    v.children.remove(child)
                    discard_subtree(child)
                else:
                    stack.append(child)

        self.vertices = [v for v in self.vertices if v.in_tree]
        self.goal_nodes = [g for g in self.goal_nodes if g.in_tree]
        if self.most_recent_vertex is not None and not self.most_recent_vertex.in_tree:
            self.most_recent_vertex = None
            self.vertex_added_since_connect = False
        return reusable

    # -- search steps -----------------------------------------------------

    def expand_next_vertex(self) -> Node:
        """Pop the best queued vertex and enqueue its candidate edges."""
        q = self.vertex_queue
        while q and not q[0][_V_LIVE]:
            heapq.heappop(q)
        if not q:
            raise RuntimeError("expand_next_vertex on an empty vertex queue")
        entry = heapq.heappop(q)
        v = entry[_V_NODE]
        v.vq_entry = None

        if self.samples:
            d = np.linalg.norm(self._s_coords - v.state, axis=1)
            mask = (self._s_alive & (d <= self.radius)
                    & (v.cost + d + self._s_lb_to_go < self.incumbent))
            for i in np.nonzero(mask)[0]:
                self._push_edge(v, self.samples[i], float(d[i]))

        if v.unexpanded:
            n = len(self.vertices)
            d = np.linalg.norm(self._v_coords[:n] - v.state, axis=1)
            mask = ((d <= self.radius)
                    & (v.cost + d + self._v_lb_to_go[:n] < self.incumbent)
                    & (v.cost + d < self._v_cost[:n]))
            for i in np.nonzero(mask)[0]:
                self._push_edge(v, self.vertices[i], float(d[i]))
        v.unexpanded = False
        return v

    def process_best_edge(self) -> str:
        """Evaluate the best queued edge; returns what happened.

        Popping an edge that can no longer improve the incumbent ends the
        batch: both queues are emptied so the next step resamples.
        """
        q = self.edge_queue
        while q and not q[0][_E_LIVE]:
            heapq.heappop(q)
        if not q:
            raise RuntimeError("process_best_edge on an empty edge queue")
        entry = heapq.heappop(q)
        v, x, c_hat = entry[_E_SOURCE], entry[_E_TARGET], entry[_E_CHAT]
        entry[_E_LIVE] = False

        if v.cost + c_hat + x.lb_to_go >= self.incumbent:
            self.clear_queues()
            return "batch_done"
        if v.cost + c_hat >= x.cost:
            return "skipped"

        p = self.problem
        if is_motion_valid(p.world, p.shape, p.validity, v.state, x.state):
            c_edge = c_hat
        else:
            c_edge = INF
        if not (v.cost + c_edge + x.lb_to_go < self.incumbent
                and v.cost + c_edge < x.cost):
            return "rejected"

        newly_connected = not x.in_tree
        if x.in_tree:
            x.parent.children.remove(x)
        else:
            x.in_tree = True
            if x.sample_idx >= 0:
                self._s_alive[x.sample_idx] = False
        x.parent = v
        v.children.append(x)
        x.cost_to_parent = c_edge
        x.cost = v.cost + c_edge
        if newly_connected:
            self._append_vertex(x)
            x.unexpanded = True
            self._push_vertex(x)
            self.most_recent_vertex = x
            self.vertex_added_since_connect = True
            if self.track_goal_vertices and x.is_goal:
                self.goal_nodes.append(x)
        self._set_cost(x, x.cost)

        if self.track_goal_vertices and self.goal_nodes:
            best = min(self.goal_nodes, key=lambda g: g.cost)
            if best.cost < self.incumbent:
                self.incumbent = best.cost
                self.protected_tip = best
        return "edge_added"

    def _set_cost(self, node: Node, new_cost: float) -> None:
        """Assign cost-to-come and propagate through the subtree eagerly."""
        node.cost = new_cost
        stack = [node]
        while stack:
            u = stack.pop()
            if u.tree_idx >= 0:
                self._v_cost[u.tree_idx] = u.cost
            self._rekey_node(u)
            for child in u.children:
                child.cost = u.cost + child.cost_to_parent
                stack.append(child)

    def step(self, iteration: int) -> None:
        """One planner iteration on this tree."""
        if self.queues_empty():
            self.start_new_batch(iteration)
        while self.best_vertex_key() <= self.best_edge_key() and self.best_vertex_key() < INF:
            self.expand_next_vertex()
        if self.best_edge_key() < INF:
            self.process_best_edge()

    # -- introspection ------------------------------------------------------

    def best_goal_node(self) -> Node | None:
        if not self.goal_nodes:
            return None
        return min(self.goal_nodes, key=lambda g: g.cost)

    def check_consistency(self, tol: float = 1e-9) -> None:
        """Assert the structural tree invariants; used by tests."""
        for v in self.vertices:
            if v is self.root:
                assert v.cost == 0.0 and v.parent is None
                continue
            assert v.parent is not None and v.parent.in_tree
            assert abs(v.cost - (v.parent.cost + v.cost_to_parent)) <= tol
            assert abs(v.cost_to_parent - distance(v.parent.state, v.state)) <= tol
            seen = {id(v)}
            node = v.parent
            while node is not None:
                assert id(node) not in seen, "cycle in tree"
                seen.add(id(node))
                node = node.parent
        for s in self.samples:
            if s.sample_idx >= 0 and self._s_alive[s.sample_idx]:
                assert not s.in_tree


class BitStarPlanner:
    """Anytime single-tree batch-informed planner."""

    planner_id = "bit"

    def __init__(self, problem: PlannerProblem, audit_queues: bool = False):
        problem.check_endpoints()
        self.problem = problem
        self.tree = BatchTree(problem.x_start, problem.x_goal, problem,
                              track_goal_vertices=True, audit_queues=audit_queues)
        self.iteration = 0

    def step(self) -> float | None:
        """One iteration; returns the new incumbent cost if it improved."""
        self.iteration += 1
        before = self.tree.incumbent
        self.tree.step(self.iteration)
        if self.tree.incumbent < before:
            return self.tree.incumbent
        return None

    def solution_path(self) -> Path | None:
        goal = self.tree.best_goal_node()
        if goal is None:
            return None
        return Path.from_states(goal.chain_states())

    def plan(self, termination: Termination) -> PlanResult:
        watch = Stopwatch()
        improvements: list[Improvement] = []
        while not termination.done(watch.elapsed(), self.iteration, self.tree.incumbent):
            improved = self.step()
            if improved is not None:
                improvements.append(Improvement(
                    iteration=self.iteration, time_s=watch.elapsed(),
                    cost=improved, path=self.solution_path()))
        path = self.solution_path()
        return PlanResult(success=path is not None, path=path,
                          improvements=improvements, iterations=self.iteration,
                          elapsed_s=watch.elapsed())
