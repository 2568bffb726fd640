"""Motion planning over probabilistic voxel maps.

Anytime batch-informed planners (single-tree and bidirectional), an
RRT-Connect baseline, an occupancy octree workspace model, and a
benchmarking CLI.
"""
from .geometry import (INF, Bounds, Path, RandomSource, as_state, distance,
                       draw_uniform, interpolate, random_source)
from .octree import (Grid2D, LogOddsParams, MapFormatError, Occupancy,
                     OccupancyOctree, PosedScan)
from .validity import (Ball, Box, RobotShape, ValidityConfig, World,
                       is_motion_valid, is_state_valid)
from .sampling import (BatchParams, InformedSet, sample_batch,
                       sample_informed, sample_uniform)
from .planning import Improvement, PlannerProblem, PlanResult, Termination
from .bitstar import BatchTree, BitStarPlanner, rgg_radius
from .dualtree import (ConnectionAttempt, ConnectionStrategy,
                       DualBitStarPlanner, StrategyConfig)
from .rrtconnect import RrtConnectConfig, RrtConnectPlanner
from .scenario import Scenario, ScenarioError, load_scenario
from .oracle import GridOracleResult, grid_oracle

__all__ = [
    "INF", "Bounds", "Path", "RandomSource", "as_state", "distance",
    "draw_uniform", "interpolate", "random_source",
    "Grid2D", "LogOddsParams", "MapFormatError", "Occupancy",
    "OccupancyOctree", "PosedScan",
    "Ball", "Box", "RobotShape", "ValidityConfig", "World",
    "is_motion_valid", "is_state_valid",
    "BatchParams", "InformedSet", "sample_batch", "sample_informed",
    "sample_uniform",
    "Improvement", "PlannerProblem", "PlanResult", "Termination",
    "BatchTree", "BitStarPlanner", "rgg_radius",
    "ConnectionAttempt", "ConnectionStrategy", "DualBitStarPlanner",
    "StrategyConfig",
    "RrtConnectConfig", "RrtConnectPlanner",
    "Scenario", "ScenarioError", "load_scenario",
    "GridOracleResult", "grid_oracle",
]

__version__ = "0.1.0"
