"""Benchmark scenario files: a JSON schema for worlds, queries, and robots."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path as FilePath

import numpy as np

from .geometry import Bounds
from .octree import OccupancyOctree
from .validity import Ball, Box, RobotShape, ValidityConfig, World, is_state_valid


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario file."""


@dataclass
class Scenario:
    name: str
    dimension: int
    bounds: Bounds
    obstacles: list
    map_path: str | None
    octree: OccupancyOctree | None
    start: np.ndarray
    goal: np.ndarray
    goal_tolerance: float
    robot_radius: float
    sensor_height: float | None

    def world(self) -> World:
        return World(bounds=self.bounds, obstacles=self.obstacles,
                     octree=self.octree)

    def shape(self) -> RobotShape:
        return RobotShape(radius=self.robot_radius)

    def validity(self) -> ValidityConfig:
        return ValidityConfig()


def _field(doc: dict, name: str, kind, required: bool = True, default=None):
    if name not in doc:
        if required:
            raise ScenarioError(f"field '{name}': missing")
        return default
    value = doc[name]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, kind):
        raise ScenarioError(f"field '{name}': expected {kind.__name__}, got {type(value).__name__}")
    return value


def _vector(doc: dict, name: str, dim: int) -> np.ndarray:
    raw = _field(doc, name, list)
    if len(raw) != dim or not all(isinstance(v, (int, float)) for v in raw):
        raise ScenarioError(f"field '{name}': expected {dim} numbers")
    return np.asarray(raw, dtype=np.float64)


def _parse_obstacles(raw: list, dim: int) -> list:
    obstacles = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or "type" not in item:
            raise ScenarioError(f"field 'obstacles[{i}]': expected an object with 'type'")
        kind = item["type"]
        center = _vector(item, "center", dim)
        if kind == "box":
            extent = _vector(item, "extent", dim)
            if np.any(extent <= 0):
                raise ScenarioError(f"field 'obstacles[{i}].extent': must be positive")
            obstacles.append(Box(center=center, extent=extent))
        elif kind == "ball":
            radius = _field(item, "radius", float)
            if radius <= 0:
                raise ScenarioError(f"field 'obstacles[{i}].radius': must be positive")
            obstacles.append(Ball(center=center, radius=radius))
        else:
            raise ScenarioError(f"field 'obstacles[{i}].type': unknown type '{kind}'")
    return obstacles


def load_scenario(path) -> Scenario:
    """Parse, validate, and resolve a scenario file.

    Map references are resolved relative to the scenario file. When a map
    is present and no bounds are given, the map's addressable cube is used.
    Start and goal must be valid under the scenario's own validity config.
    """
    path = FilePath(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")

    name = _field(doc, "name", str)
    dim = _field(doc, "dimension", int)
    if dim not in (2, 3):
        raise ScenarioError(f"field 'dimension': must be 2 or 3, got {dim}")

    has_obstacles = "obstacles" in doc
    map_path = _field(doc, "map", str, required=False)
    if has_obstacles and map_path is not None:
        raise ScenarioError("fields 'obstacles' and 'map' are mutually exclusive")

    octree = None
    if map_path is not None:
        if dim != 3:
            raise ScenarioError("field 'map': octree worlds require dimension 3")
        resolved = (path.parent / map_path).resolve()
        if not resolved.exists():
            raise ScenarioError(f"field 'map': file not found: {resolved}")
        octree = OccupancyOctree.load(resolved)

    if "bounds" in doc:
        raw_bounds = _field(doc, "bounds", dict)
        lo = _vector(raw_bounds, "min", dim)
        hi = _vector(raw_bounds, "max", dim)
        try:
            bounds = Bounds(lo, hi)
        except ValueError as exc:
            raise ScenarioError(f"field 'bounds': {exc}") from exc
    elif octree is not None:
        corner = octree.corner
        bounds = Bounds(corner, corner + octree.side)
    else:
        raise ScenarioError("field 'bounds': missing")

    obstacles = _parse_obstacles(_field(doc, "obstacles", list, required=False, default=[]), dim)
    start = _vector(doc, "start", dim)
    goal = _vector(doc, "goal", dim)
    goal_tolerance = _field(doc, "goal_tolerance", float, required=False, default=0.0)
    robot_radius = _field(doc, "robot_radius", float, required=False, default=0.0)
    sensor_height = _field(doc, "sensor_height", float, required=False)
    if goal_tolerance < 0:
        raise ScenarioError("field 'goal_tolerance': must be non-negative")
    if robot_radius < 0:
        raise ScenarioError("field 'robot_radius': must be non-negative")

    scenario = Scenario(name=name, dimension=dim, bounds=bounds,
                        obstacles=obstacles, map_path=map_path, octree=octree,
                        start=start, goal=goal, goal_tolerance=goal_tolerance,
                        robot_radius=robot_radius, sensor_height=sensor_height)

    world, shape, cfg = scenario.world(), scenario.shape(), scenario.validity()
    if not is_state_valid(world, shape, cfg, start):
        raise ScenarioError("field 'start': state is invalid in this world")
    if not is_state_valid(world, shape, cfg, goal):
        raise ScenarioError("field 'goal': state is invalid in this world")
    return scenario
