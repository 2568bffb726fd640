"""States, metric primitives, paths, and the shared randomness contract.

Planning states are plain float64 numpy vectors of length 2 or 3. Costs are
plain floats, with ``math.inf`` standing in for the unreachable cost: it
compares greater than every finite cost and absorbs finite addition, which
is exactly the arithmetic the planners rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INF = math.inf

RandomSource = np.random.Generator


def random_source(seed: int) -> RandomSource:
    """Create a deterministic random source from a 64-bit seed.

    Equal seeds yield equal draw sequences; every stochastic operation in
    this package takes one of these explicitly (no global randomness).
    """
    return np.random.default_rng(seed)


def draw_uniform(rng: RandomSource) -> float:
    """One uniform draw in [0, 1), advancing the generator."""
    return float(rng.random())


def as_state(coords, dim: int | None = None) -> np.ndarray:
    """Validate and convert coordinates into a planning state.

    Raises ValueError for non-finite entries, unsupported dimension, or a
    mismatch with the expected dimension ``dim``.
    """
    x = np.asarray(coords, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] not in (2, 3):
        raise ValueError(f"state must be a 2- or 3-vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"state has non-finite coordinates: {x}")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"state has dimension {x.shape[0]}, expected {dim}")
    return x


def distance(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance between two states of equal dimension."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def interpolate(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """Point a + t*(b - a) for t in [0, 1]."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"interpolation parameter {t} outside [0, 1]")
    return a + t * (b - a)


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned planning box with positive extent on every axis."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=np.float64)
        hi = np.asarray(self.max, dtype=np.float64)
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)
        if lo.shape != hi.shape or lo.ndim != 1 or lo.shape[0] not in (2, 3):
            raise ValueError("bounds must be matching 2- or 3-vectors")
        if not np.all(hi - lo > 0):
            raise ValueError(f"degenerate bounds: min={lo}, max={hi}")

    @property
    def dim(self) -> int:
        return self.min.shape[0]

    @property
    def extent(self) -> np.ndarray:
        return self.max - self.min

    def volume(self) -> float:
        return float(np.prod(self.extent))

    def diagonal(self) -> float:
        return float(np.linalg.norm(self.extent))

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.min) and np.all(x <= self.max))

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized containment for an (N, dim) array of points."""
        return np.all((pts >= self.min) & (pts <= self.max), axis=1)


@dataclass
class Path:
    """An ordered state sequence with its summed segment length."""

    states: list[np.ndarray]
    cost: float = field(default=0.0)

    @classmethod
    def from_states(cls, states: list[np.ndarray]) -> "Path":
        cost = sum(
            distance(a, b) for a, b in zip(states[:-1], states[1:])
        )
        return cls(states=list(states), cost=float(cost))

    def segment_lengths(self) -> list[float]:
        return [distance(a, b) for a, b in zip(self.states[:-1], self.states[1:])]

    def recompute_cost(self) -> float:
        return float(sum(self.segment_lengths()))
