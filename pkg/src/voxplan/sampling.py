"""Uniform and informed (prolate hyperspheroid) sampling.

Once an incumbent solution exists, new samples are drawn uniformly from
the ellipsoid of states that could still improve it: points whose summed
distance to the two foci does not exceed the incumbent cost. Sampling is
by direct transformation of uniform unit-ball samples, with rejection
against the planning bounds only.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .geometry import INF, Bounds, RandomSource, distance

logger = logging.getLogger(__name__)

_MAX_BOUNDS_REJECTIONS = 1000


@dataclass(frozen=True)
class BatchParams:
    """Number of samples drawn per planner batch."""

    m: int = 100

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("batch size must be at least 1")


@dataclass
class InformedSet:
    """Ellipsoid of potentially improving states between two foci."""

    focus_a: np.ndarray
    focus_b: np.ndarray
    c_best: float

    def __post_init__(self):
        self.c_min = distance(self.focus_a, self.focus_b)
        if not math.isfinite(self.c_best):
            raise ValueError("informed set needs a finite best cost")
        if self.c_best < self.c_min:
            raise ValueError(f"best cost {self.c_best} below focus distance {self.c_min}")

    def contains(self, x: np.ndarray) -> bool:
        return distance(self.focus_a, x) + distance(x, self.focus_b) <= self.c_best


def unit_ball_measure(n: int) -> float:
    """Lebesgue measure of the n-dimensional unit ball."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def ellipsoid_measure(c_best: float, c_min: float, n: int) -> float:
    """Measure of the prolate hyperspheroid with the given diameters."""
    a = c_best / 2.0
    b = math.sqrt(max(0.0, c_best * c_best - c_min * c_min)) / 2.0
    return unit_ball_measure(n) * a * b ** (n - 1)


def _sample_unit_ball(n: int, rng: RandomSource) -> np.ndarray:
    direction = rng.standard_normal(n)
    norm = np.linalg.norm(direction)
    while norm == 0.0:
        direction = rng.standard_normal(n)
        norm = np.linalg.norm(direction)
    radius = rng.random() ** (1.0 / n)
    return direction / norm * radius


def rotation_to_axis(axis: np.ndarray) -> np.ndarray:
    """Rotation whose first column is the given unit axis.

    The remaining columns come from Gram-Schmidt over the standard basis,
    so the result is deterministic and dimension-generic.
    """
    n = axis.shape[0]
    cols = [axis]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        for c in cols:
            e = e - np.dot(e, c) * c
        norm = np.linalg.norm(e)
        if norm > 1e-9:
            cols.append(e / norm)
        if len(cols) == n:
            break
    return np.column_stack(cols)


def sample_uniform(bounds: Bounds, rng: RandomSource) -> np.ndarray:
    """Uniform draw over the bounds box."""
    return bounds.min + rng.random(bounds.dim) * bounds.extent


def sample_informed(iset: InformedSet, bounds: Bounds, rng: RandomSource) -> np.ndarray:
    """Uniform draw over the informed ellipsoid intersected with bounds.

    Membership in the ellipsoid is enforced exactly; rounding on boundary
    points is repaired by shrinking toward the center. After 1000 bounds
    rejections the draw falls back to uniform-in-bounds with a warning.
    """
    n = bounds.dim
    center = (iset.focus_a + iset.focus_b) / 2.0
    a = iset.c_best / 2.0
    b = math.sqrt(max(0.0, iset.c_best ** 2 - iset.c_min ** 2)) / 2.0
    radii = np.full(n, b)
    radii[0] = a
    if iset.c_min > 0:
        rot = rotation_to_axis((iset.focus_b - iset.focus_a) / iset.c_min)
    else:
        rot = np.eye(n)

    for _ in range(_MAX_BOUNDS_REJECTIONS):
        x = center + rot @ (radii * _sample_unit_ball(n, rng))
        for _ in range(64):
            if iset.contains(x):
                break
            x = center + (x - center) * (1.0 - 1e-9)
        else:
            continue
        if bounds.contains(x):
            return x
    logger.warning("informed set barely overlaps bounds; falling back to uniform")
    return sample_uniform(bounds, rng)


def sample_batch(m: int, x_start: np.ndarray, x_goal: np.ndarray, c_i: float,
                 bounds: Bounds, rng: RandomSource) -> list[np.ndarray]:
    """Draw m states: informed when an incumbent cost exists, else uniform."""
    if m < 1:
        raise ValueError("batch size must be at least 1")
    if c_i == INF or not math.isfinite(c_i):
        return [sample_uniform(bounds, rng) for _ in range(m)]
    iset = InformedSet(x_start, x_goal, c_i)
    return [sample_informed(iset, bounds, rng) for _ in range(m)]
