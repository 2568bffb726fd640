"""Brute-force grid shortest-path oracle for checking planner optimality.

Dijkstra over the regular grid of valid cell centers, 8-connected in 2D and
26-connected in 3D, with diagonal moves charged their true Euclidean length.
The result upper-bounds the continuous optimum by at most the connectivity
metric's slack, which makes it a usable two-sided reference at fine
resolutions.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import INF
from .scenario import Scenario
from .validity import is_state_valid


@dataclass(frozen=True)
class GridOracleResult:
    grid_resolution: float
    cost: float
    connectivity: int


def _valid_mask(scenario: Scenario, centers_flat: np.ndarray, shape) -> np.ndarray:
    world = scenario.world()
    robot = scenario.shape()
    cfg = scenario.validity()
    if world.octree is None:
        from .validity import _points_clear_analytic
        ok = world.bounds.contains_many(centers_flat)
        ok &= _points_clear_analytic(world, robot, centers_flat)
    else:
        ok = np.array([is_state_valid(world, robot, cfg, p) for p in centers_flat])
    return ok.reshape(shape)


def grid_oracle(scenario: Scenario, grid_resolution: float) -> GridOracleResult:
    """Shortest grid path between the cells containing start and goal."""
    if grid_resolution <= 0:
        raise ValueError("grid_resolution must be positive")
    bounds = scenario.bounds
    dim = scenario.dimension
    res = grid_resolution
    shape = tuple(max(1, int(np.ceil(e / res))) for e in bounds.extent)

    axes = [bounds.min[ax] + (np.arange(shape[ax]) + 0.5) * res for ax in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    centers_flat = np.stack([m.ravel() for m in mesh], axis=1)
    valid = _valid_mask(scenario, centers_flat, shape)

    def cell_of(p: np.ndarray) -> tuple[int, ...] | None:
        idx = np.floor((p - bounds.min) / res).astype(int)
        idx = np.clip(idx, 0, np.asarray(shape) - 1)
        return tuple(int(v) for v in idx)

    start = cell_of(scenario.start)
    goal = cell_of(scenario.goal)
    connectivity = 8 if dim == 2 else 26
    if not valid[start] or not valid[goal]:
        return GridOracleResult(res, INF, connectivity)

    moves = [m for m in itertools.product((-1, 0, 1), repeat=dim) if any(m)]
    move_costs = [float(np.linalg.norm(m)) * res for m in moves]

    dist = np.full(shape, INF)
    dist[start] = 0.0
    heap = [(0.0, start)]
    while heap:
        d, cell = heapq.heappop(heap)
        if cell == goal:
            return GridOracleResult(res, d, connectivity)
        if d > dist[cell]:
            continue
        for move, step_cost in zip(moves, move_costs):
            nxt = tuple(c + m for c, m in zip(cell, move))
            if any(v < 0 or v >= s for v, s in zip(nxt, shape)):
                continue
            if not valid[nxt]:
                continue
            nd = d + step_cost
            if nd < dist[nxt]:
                dist[nxt] = nd
                heapq.heappush(heap, (nd, nxt))
    return GridOracleResult(res, INF, connectivity)
