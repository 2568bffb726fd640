"""State and motion validity for a ball-shaped robot.

Worlds are either analytic (axis-aligned boxes and balls) or backed by an
occupancy octree. Motion checks densely interpolate the segment at a fixed
spatial step, which keeps them symmetric in the endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Bounds
from .octree import Occupancy, OccupancyOctree


@dataclass(frozen=True)
class RobotShape:
    """Bounding-ball robot model."""

    radius: float = 0.0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be non-negative")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box obstacle; extent holds full side lengths."""

    center: np.ndarray
    extent: np.ndarray

    @property
    def lo(self) -> np.ndarray:
        return self.center - self.extent / 2.0

    @property
    def hi(self) -> np.ndarray:
        return self.center + self.extent / 2.0


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class ValidityConfig:
    unknown_is_invalid: bool = True
    check_resolution: float | None = None

    def __post_init__(self):
        if self.check_resolution is not None and self.check_resolution <= 0:
            raise ValueError("check_resolution must be positive")


@dataclass
class World:
    """Planning bounds plus either analytic obstacles or an octree map."""

    bounds: Bounds
    obstacles: list = field(default_factory=list)
    octree: OccupancyOctree | None = None

    def __post_init__(self):
        if self.octree is not None and self.obstacles:
            raise ValueError("world takes analytic obstacles or an octree, not both")

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def resolved_check_resolution(self, cfg: ValidityConfig) -> float:
        if cfg.check_resolution is not None:
            return cfg.check_resolution
        if self.octree is not None:
            return self.octree.resolution / 2.0
        return 0.01


def _points_clear_analytic(world: World, shape: RobotShape, pts: np.ndarray) -> np.ndarray:
    """Per-point obstacle clearance for an (N, dim) array; bounds excluded."""
    ok = np.ones(len(pts), dtype=bool)
    r = shape.radius
    for obs in world.obstacles:
        if isinstance(obs, Box):
            clamped = np.clip(pts, obs.lo, obs.hi)
            d2 = np.sum((pts - clamped) ** 2, axis=1)
            ok &= d2 > r * r
        elif isinstance(obs, Ball):
            d2 = np.sum((pts - obs.center) ** 2, axis=1)
            reach = obs.radius + r
            ok &= d2 > reach * reach
        else:
            raise TypeError(f"unknown obstacle type {type(obs)!r}")
    return ok


def _octree_state_ok(world: World, shape: RobotShape, cfg: ValidityConfig,
                     x: np.ndarray) -> bool:
    state = world.octree.worst_in_ball(x, shape.radius)
    if state == Occupancy.OCCUPIED:
        return False
    if state == Occupancy.UNKNOWN and cfg.unknown_is_invalid:
        return False
    return True


def is_state_valid(world: World, shape: RobotShape, cfg: ValidityConfig,
                   x: np.ndarray) -> bool:
    """True when the robot ball at x stays in bounds and clear of obstacles."""
    if not world.bounds.contains(x):
        return False
    if world.octree is not None:
        return _octree_state_ok(world, shape, cfg, x)
    return bool(_points_clear_analytic(world, shape, x[None, :])[0])


def motion_check_points(a: np.ndarray, b: np.ndarray, step: float) -> np.ndarray:
    """Endpoint-inclusive interpolation lattice spaced at most `step` apart."""
    dist = float(np.linalg.norm(b - a))
    n = max(1, int(math.ceil(dist / step)))
    ts = np.linspace(0.0, 1.0, n + 1)
    return a[None, :] + ts[:, None] * (b - a)[None, :]


def is_motion_valid(world: World, shape: RobotShape, cfg: ValidityConfig,
                    a: np.ndarray, b: np.ndarray) -> bool:
    """Validate the straight segment a -> b at the configured resolution."""
    pts = motion_check_points(a, b, world.resolved_check_resolution(cfg))
    if world.octree is not None:
        in_bounds = world.bounds.contains_many(pts)
        if not np.all(in_bounds):
            return False
        return all(_octree_state_ok(world, shape, cfg, p) for p in pts)
    ok = world.bounds.contains_many(pts)
    if not np.all(ok):
        return False
    return bool(np.all(_points_clear_analytic(world, shape, pts)))
