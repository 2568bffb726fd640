"""Probabilistic occupancy octree with log-odds updates.

The map addresses a cube of side ``resolution * 2**max_depth`` centered at
the world origin. Leaves hold clamped log-odds; a leaf stored above the
maximum depth stands for a uniform (pruned) subtree. Space not covered by
any node is unknown, which callers can distinguish from free space.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class Occupancy(IntEnum):
    UNKNOWN = -1
    FREE = 0
    OCCUPIED = 1


@dataclass(frozen=True)
class LogOddsParams:
    """Additive occupancy model: hits raise log-odds, misses lower it."""

    hit_logodds: float = 0.85
    miss_logodds: float = -0.4
    clamp_min: float = -2.0
    clamp_max: float = 3.5
    occupied_threshold: float = 0.0

    def __post_init__(self):
        if not self.hit_logodds > 0 > self.miss_logodds:
            raise ValueError("need hit_logodds > 0 > miss_logodds")
        if not self.clamp_min < self.occupied_threshold < self.clamp_max:
            raise ValueError("occupied_threshold must lie strictly inside the clamp range")

    def clamp(self, value: float) -> float:
        return min(self.clamp_max, max(self.clamp_min, value))


@dataclass
class PosedScan:
    """One sensor sweep: world-frame hit points seen from a fixed origin.

    A point at or beyond ``max_range`` from the origin is treated as
    range-truncated: its ray clears space but marks no obstacle.
    """

    origin: np.ndarray
    points: list[np.ndarray]
    max_range: float

    def __post_init__(self):
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")


class OctreeNode:
    """Leaf (children is None, log_odds valid) or internal node."""

    __slots__ = ("children", "log_odds")

    def __init__(self, log_odds: float = 0.0, children=None):
        self.log_odds = log_odds
        self.children = children

    @property
    def is_leaf(self) -> bool:
        return self.children is None


def traverse_voxels(p0: np.ndarray, p1: np.ndarray, corner: np.ndarray,
                    resolution: float, max_index: int):
    """Integer DDA over the voxels crossed by the segment p0 -> p1.

    Yields (ix, iy, iz) tuples from the voxel containing p0 through the
    voxel containing p1, face-adjacent at every step. Both endpoints must
    lie inside the addressable cube.
    """
    key = np.floor((p0 - corner) / resolution).astype(np.int64)
    end = np.floor((p1 - corner) / resolution).astype(np.int64)
    np.clip(key, 0, max_index - 1, out=key)
    np.clip(end, 0, max_index - 1, out=end)

    yield tuple(int(v) for v in key)
    if np.array_equal(key, end):
        return

    d = p1 - p0
    step = np.sign(end - key).astype(np.int64)
    t_max = np.full(3, np.inf)
    t_delta = np.full(3, np.inf)
    for ax in range(3):
        if step[ax] > 0:
            boundary = corner[ax] + (key[ax] + 1) * resolution
            t_max[ax] = (boundary - p0[ax]) / d[ax]
            t_delta[ax] = resolution / d[ax]
        elif step[ax] < 0:
            boundary = corner[ax] + key[ax] * resolution
            t_max[ax] = (boundary - p0[ax]) / d[ax]
            t_delta[ax] = -resolution / d[ax]

    # Exactly sum(|end-key|) single-axis steps reach the end voxel; axes
    # that already arrived are excluded so float error cannot overshoot.
    remaining = np.abs(end - key)
    total = int(remaining.sum())
    for _ in range(total):
        ax = min((a for a in range(3) if remaining[a] > 0), key=lambda a: t_max[a])
        key[ax] += step[ax]
        remaining[ax] -= 1
        t_max[ax] += t_delta[ax]
        yield tuple(int(v) for v in key)


class MapFormatError(ValueError):
    """Raised when a serialized map stream is malformed."""


_HEADER = struct.Struct("<4sdB")
_LEAF_VALUE = struct.Struct("<f")
_MAGIC = b"VOX1"


@dataclass
class OccupancyOctree:
    resolution: float
    max_depth: int
    params: LogOddsParams = field(default_factory=LogOddsParams)
    root: OctreeNode | None = None

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if not 1 <= self.max_depth <= 21:
            raise ValueError("max_depth must be in [1, 21]")

    # -- addressing ---------------------------------------------------

    @property
    def side(self) -> float:
        return self.resolution * (1 << self.max_depth)

    @property
    def corner(self) -> np.ndarray:
        return np.full(3, -self.side / 2.0)

    @property
    def max_index(self) -> int:
        return 1 << self.max_depth

    def voxel_key(self, p: np.ndarray) -> tuple[int, int, int] | None:
        """Integer voxel indices at leaf depth, or None outside the cube."""
        idx = np.floor((p - self.corner) / self.resolution).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= self.max_index):
            return None
        return (int(idx[0]), int(idx[1]), int(idx[2]))

    def voxel_center(self, key: tuple[int, int, int]) -> np.ndarray:
        return self.corner + (np.asarray(key, dtype=np.float64) + 0.5) * self.resolution

    def in_cube(self, p: np.ndarray) -> bool:
        return self.voxel_key(p) is not None

    # -- queries ------------------------------------------------------

    def classify(self, log_odds: float) -> Occupancy:
        if log_odds > self.params.occupied_threshold:
            return Occupancy.OCCUPIED
        return Occupancy.FREE

    def query(self, p: np.ndarray) -> Occupancy:
        key = self.voxel_key(p)
        if key is None or self.root is None:
            return Occupancy.UNKNOWN
        return self.query_key(key)

    def query_key(self, key: tuple[int, int, int]) -> Occupancy:
        node = self.root
        if node is None:
            return Occupancy.UNKNOWN
        for depth in range(self.max_depth):
            if node.is_leaf:
                return self.classify(node.log_odds)
            shift = self.max_depth - 1 - depth
            idx = (((key[0] >> shift) & 1) << 2) | (((key[1] >> shift) & 1) << 1) | ((key[2] >> shift) & 1)
            node = node.children[idx]
            if node is None:
                return Occupancy.UNKNOWN
        return self.classify(node.log_odds)

    # -- updates ------------------------------------------------------

    def update_voxel(self, key: tuple[int, int, int], delta: float) -> None:
        """Add delta to one leaf voxel's log-odds, clamped.

        Coarse leaves along the path are split so the update stays local.
        """
        if self.root is None:
            self.root = OctreeNode(children=[None] * 8)
        node = self.root
        for depth in range(self.max_depth):
            if node.is_leaf:
                node.children = [OctreeNode(node.log_odds) for _ in range(8)]
            shift = self.max_depth - 1 - depth
            idx = (((key[0] >> shift) & 1) << 2) | (((key[1] >> shift) & 1) << 1) | ((key[2] >> shift) & 1)
            child = node.children[idx]
            if child is None:
                child = OctreeNode() if depth == self.max_depth - 1 else OctreeNode(children=[None] * 8)
                node.children[idx] = child
            node = child
        node.log_odds = self.params.clamp(node.log_odds + delta)

    def insert_scan(self, scan: PosedScan) -> "OccupancyOctree":
        """Integrate one scan: misses along each ray, a hit at each endpoint.

        Each voxel is updated at most once per polarity per scan, with hits
        taking precedence over misses. Endpoints beyond max_range or outside
        the addressable cube are truncated and contribute free space only.
        Returns self (the map is updated in place).
        """
        if not self.in_cube(scan.origin):
            raise ValueError("scan origin outside the addressable cube")
        hits: set[tuple[int, int, int]] = set()
        misses: set[tuple[int, int, int]] = set()
        for pt in scan.points:
            end, truncated = self._clip_ray(scan.origin, pt, scan.max_range)
            if end is None:
                continue
            keys = list(traverse_voxels(scan.origin, end, self.corner,
                                        self.resolution, self.max_index))
            misses.update(keys[:-1])
            if truncated:
                misses.add(keys[-1])
            else:
                hits.add(keys[-1])
        misses -= hits
        for key in hits:
            self.update_voxel(key, self.params.hit_logodds)
        for key in misses:
            self.update_voxel(key, self.params.miss_logodds)
        return self

    def _clip_ray(self, origin: np.ndarray, point: np.ndarray,
                  max_range: float) -> tuple[np.ndarray | None, bool]:
        """Clip a ray endpoint to max_range and the addressable cube.

        Returns (endpoint, truncated); truncated endpoints are free-only.
        """
        delta = point - origin
        length = float(np.linalg.norm(delta))
        if length == 0.0:
            return point.copy(), False
        truncated = False
        t_end = 1.0
        if length >= max_range:
            t_end = max_range / length
            truncated = True
        lo = self.corner
        hi = self.corner + self.side
        for ax in range(3):
            if delta[ax] > 0:
                t_face = (hi[ax] - origin[ax]) / delta[ax]
            elif delta[ax] < 0:
                t_face = (lo[ax] - origin[ax]) / delta[ax]
            else:
                continue
            if t_face < t_end:
                t_end = max(0.0, t_face * (1.0 - 1e-12))
                truncated = True
        return origin + t_end * delta, truncated

    # -- pruning ------------------------------------------------------

    def prune(self) -> "OccupancyOctree":
        """Merge nodes whose eight children are equal-valued leaves.

        Query results are identical before and after. Returns self.
        """
        if self.root is not None:
            self._prune_node(self.root)
        return self

    def _prune_node(self, node: OctreeNode) -> None:
        if node.is_leaf:
            return
        for child in node.children:
            if child is not None:
                self._prune_node(child)
        first = node.children[0]
        if first is None or not first.is_leaf:
            return
        value = first.log_odds
        for child in node.children[1:]:
            if child is None or not child.is_leaf or child.log_odds != value:
                return
        node.children = None
        node.log_odds = value

    # -- ray casting ---------------------------------------------------

    def cast_ray(self, origin: np.ndarray, direction: np.ndarray,
                 max_range: float) -> np.ndarray | None:
        """Center of the first occupied voxel hit, or None.

        Unknown voxels are traversed, not reported as hits. The origin must
        lie inside the addressable cube.
        """
        if abs(float(np.linalg.norm(direction)) - 1.0) > 1e-9:
            raise ValueError("direction must be a unit vector")
        if max_range <= 0:
            raise ValueError("max_range must be positive")
        key = self.voxel_key(origin)
        if key is None:
            return None
        if self.query_key(key) == Occupancy.OCCUPIED:
            return self.voxel_center(key)

        key = np.asarray(key, dtype=np.int64)
        step = np.sign(direction).astype(np.int64)
        t_max = np.full(3, np.inf)
        t_delta = np.full(3, np.inf)
        for ax in range(3):
            if direction[ax] > 0:
                boundary = self.corner[ax] + (key[ax] + 1) * self.resolution
                t_max[ax] = (boundary - origin[ax]) / direction[ax]
                t_delta[ax] = self.resolution / direction[ax]
            elif direction[ax] < 0:
                boundary = self.corner[ax] + key[ax] * self.resolution
                t_max[ax] = (boundary - origin[ax]) / direction[ax]
                t_delta[ax] = -self.resolution / direction[ax]
        while True:
            ax = int(np.argmin(t_max))
            if t_max[ax] > max_range:
                return None
            key[ax] += step[ax]
            if key[ax] < 0 or key[ax] >= self.max_index:
                return None
            t_max[ax] += t_delta[ax]
            k = (int(key[0]), int(key[1]), int(key[2]))
            if self.query_key(k) == Occupancy.OCCUPIED:
                return self.voxel_center(k)

    # -- ball queries (used for robot collision checks) ----------------

    def worst_in_ball(self, center: np.ndarray, radius: float) -> Occupancy:
        """Worst occupancy among voxels whose box intersects the ball.

        Priority OCCUPIED > UNKNOWN > FREE; space outside the addressable
        cube counts as unknown.
        """
        lo = self.corner
        if np.any(center - radius < lo) or np.any(center + radius > lo + self.side):
            outside_unknown = True
        else:
            outside_unknown = False
        found_unknown = [outside_unknown]
        if self._ball_hits_occupied(self.root, lo, self.side, center, radius, found_unknown):
            return Occupancy.OCCUPIED
        if found_unknown[0]:
            return Occupancy.UNKNOWN
        return Occupancy.FREE

    def _ball_hits_occupied(self, node, lo, size, center, radius, found_unknown) -> bool:
        clamped = np.clip(center, lo, lo + size)
        if float(np.sum((center - clamped) ** 2)) > radius * radius:
            return False
        if node is None:
            found_unknown[0] = True
            return False
        if node.is_leaf:
            return self.classify(node.log_odds) == Occupancy.OCCUPIED
        half = size / 2.0
        for idx, child in enumerate(node.children):
            off = np.array([(idx >> 2) & 1, (idx >> 1) & 1, idx & 1], dtype=np.float64)
            if self._ball_hits_occupied(child, lo + off * half, half, center, radius, found_unknown):
                return True
        return False

    # -- leaf iteration and extents ------------------------------------

    def iter_leaves(self):
        """Yield (lo_corner, size, log_odds) for every stored leaf."""
        if self.root is None:
            return
        stack = [(self.root, self.corner, self.side)]
        while stack:
            node, lo, size = stack.pop()
            if node.is_leaf:
                yield lo, size, node.log_odds
                continue
            half = size / 2.0
            for idx, child in enumerate(node.children):
                if child is None:
                    continue
                off = np.array([(idx >> 2) & 1, (idx >> 1) & 1, idx & 1], dtype=np.float64)
                stack.append((child, lo + off * half, half))

    def data_bounds(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Tight AABB over all known leaves, or None for an empty map."""
        lo = None
        hi = None
        for leaf_lo, size, _ in self.iter_leaves():
            leaf_hi = leaf_lo + size
            lo = leaf_lo.copy() if lo is None else np.minimum(lo, leaf_lo)
            hi = leaf_hi.copy() if hi is None else np.maximum(hi, leaf_hi)
        if lo is None:
            return None
        return lo, hi

    def node_count(self) -> int:
        if self.root is None:
            return 0
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            if not node.is_leaf:
                stack.extend(c for c in node.children if c is not None)
        return count

    # -- serialization --------------------------------------------------

    def serialize(self) -> bytes:
        """Binary stream: magic, resolution, depth, preorder node records."""
        out = bytearray()
        out += _HEADER.pack(_MAGIC, self.resolution, self.max_depth)
        if self.root is not None:
            self._write_node(out, self.root)
        return bytes(out)

    def _write_node(self, out: bytearray, node: OctreeNode) -> None:
        if node.is_leaf:
            out.append(0x00)
            out += _LEAF_VALUE.pack(node.log_odds)
            return
        mask = 0
        for idx, child in enumerate(node.children):
            if child is not None:
                mask |= 1 << idx
        out.append(mask)
        for child in node.children:
            if child is not None:
                self._write_node(out, child)

    @classmethod
    def deserialize(cls, data: bytes, params: LogOddsParams | None = None) -> "OccupancyOctree":
        if len(data) < _HEADER.size:
            raise MapFormatError(f"truncated header at byte {len(data)}")
        magic, resolution, max_depth = _HEADER.unpack_from(data, 0)
        if magic != _MAGIC:
            raise MapFormatError(f"bad magic {magic!r} at byte 0")
        tree = cls(resolution=resolution, max_depth=max_depth,
                   params=params or LogOddsParams())
        offset = _HEADER.size
        if offset == len(data):
            return tree
        tree.root, offset = cls._read_node(data, offset)
        if offset != len(data):
            raise MapFormatError(f"{len(data) - offset} trailing bytes at byte {offset}")
        return tree

    @classmethod
    def _read_node(cls, data: bytes, offset: int) -> tuple[OctreeNode, int]:
        if offset >= len(data):
            raise MapFormatError(f"truncated node stream at byte {offset}")
        mask = data[offset]
        offset += 1
        if mask == 0x00:
            if offset + _LEAF_VALUE.size > len(data):
                raise MapFormatError(f"truncated leaf value at byte {offset}")
            (value,) = _LEAF_VALUE.unpack_from(data, offset)
            return OctreeNode(float(value)), offset + _LEAF_VALUE.size
        children: list[OctreeNode | None] = [None] * 8
        for idx in range(8):
            if mask & (1 << idx):
                children[idx], offset = cls._read_node(data, offset)
        return OctreeNode(children=children), offset

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.serialize())

    @classmethod
    def load(cls, path, params: LogOddsParams | None = None) -> "OccupancyOctree":
        with open(path, "rb") as fh:
            return cls.deserialize(fh.read(), params=params)

    # -- 2D cross-sections -----------------------------------------------

    def cross_section(self, height: float, resolution_2d: float,
                      bounds_xy: tuple[np.ndarray, np.ndarray] | None = None) -> "Grid2D":
        """Occupancy slice through the slab height +- resolution/2.

        A cell is occupied if any occupied voxel intersects the slab over
        it, free if only free voxels do, unknown otherwise. The grid covers
        ``bounds_xy`` when given, else the known-data footprint.
        """
        if resolution_2d < self.resolution:
            raise ValueError("resolution_2d must be at least the map resolution")
        if bounds_xy is None:
            bbox = self.data_bounds()
            if bbox is None:
                return Grid2D(origin=np.zeros(2), resolution=resolution_2d,
                              cells=np.full((0, 0), Occupancy.UNKNOWN, dtype=np.int8))
            lo_xy, hi_xy = bbox[0][:2], bbox[1][:2]
        else:
            lo_xy, hi_xy = np.asarray(bounds_xy[0], float), np.asarray(bounds_xy[1], float)
        nx = max(1, int(np.ceil((hi_xy[0] - lo_xy[0]) / resolution_2d)))
        ny = max(1, int(np.ceil((hi_xy[1] - lo_xy[1]) / resolution_2d)))
        cells = np.full((nx, ny), Occupancy.UNKNOWN, dtype=np.int8)

        eps = self.resolution / 2.0
        z_lo, z_hi = height - eps, height + eps
        for leaf_lo, size, log_odds in self.iter_leaves():
            if leaf_lo[2] > z_hi or leaf_lo[2] + size <= z_lo:
                continue
            state = self.classify(log_odds)
            i_lo = max(0, int(np.floor((leaf_lo[0] - lo_xy[0]) / resolution_2d)))
            i_hi = min(nx - 1, int(np.ceil((leaf_lo[0] + size - lo_xy[0]) / resolution_2d)) - 1)
            j_lo = max(0, int(np.floor((leaf_lo[1] - lo_xy[1]) / resolution_2d)))
            j_hi = min(ny - 1, int(np.ceil((leaf_lo[1] + size - lo_xy[1]) / resolution_2d)) - 1)
            if i_lo > i_hi or j_lo > j_hi:
                continue
            block = cells[i_lo:i_hi + 1, j_lo:j_hi + 1]
            if state == Occupancy.OCCUPIED:
                block[:] = Occupancy.OCCUPIED
            else:
                block[block == Occupancy.UNKNOWN] = Occupancy.FREE
        return Grid2D(origin=lo_xy.copy(), resolution=resolution_2d, cells=cells)


@dataclass
class Grid2D:
    """Regular 2D occupancy grid produced by cross-sectioning a map."""

    origin: np.ndarray
    resolution: float
    cells: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def cell_center(self, i: int, j: int) -> np.ndarray:
        return self.origin + (np.array([i, j], dtype=np.float64) + 0.5) * self.resolution

    def occupancy_at(self, p_xy: np.ndarray) -> Occupancy:
        idx = np.floor((p_xy - self.origin) / self.resolution).astype(int)
        if np.any(idx < 0) or idx[0] >= self.cells.shape[0] or idx[1] >= self.cells.shape[1]:
            return Occupancy.UNKNOWN
        return Occupancy(int(self.cells[idx[0], idx[1]]))
