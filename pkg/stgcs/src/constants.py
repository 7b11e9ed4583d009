"""
Numerical constants and defaults shared by the planner modules.
"""

import os
import math
from typing import Optional


# Containment / emptiness tolerance. Every boundary comparison is inclusive.
TOL = 1e-9

# Partition checks after decomposition tolerate slightly looser boundaries.
PARTITION_TOL = 1e-7

# Minimum dwell per convex set along a trajectory (seconds).
EPSILON = 1e-3

# Arcs carrying less flow than this are ignored when rounding.
FLOW_EPS = 1e-6

# Global planning horizon (seconds).
T_MAX = 50.0

# Wall-clock budget for the multi-robot planners (seconds).
TIME_BUDGET_S = 150.0

# Path sampling budget is PATH_BUDGET_SCALE * log(|E|).
PATH_BUDGET_SCALE = 1e3

# Exhaustive simple-path enumeration stops after this many paths.
MAX_EXHAUSTIVE_PATHS = 100_000

# Instance sampling gives up after this many rejections.
MAX_REJECTIONS = 100_000

# Collision threshold slack: robots collide when closer than r - COLLISION_SLACK.
COLLISION_SLACK = 1e-9

# Dense-sampling step used by validation.
VALIDATION_DT = 1e-3

SCHEMA_VERSION = 1

# Directory for generated instances and bench outputs.
DATA_DIR = os.environ.get('STGCS_DATA_DIR', os.path.join('~', 'stgcs'))


def get_default_data_dir(given_data_dir: Optional[str] = None) -> str:
    """Returns the default data_dir."""
    if given_data_dir:
        return os.path.expanduser(given_data_dir)
    return os.path.expanduser(DATA_DIR)


def default_path_budget(num_edges: int, scale: float = PATH_BUDGET_SCALE, log_base: Optional[float] = None) -> int:
    """`ceil(scale * log|E|)`, natural log unless `log_base` is given; never below 1."""
    if num_edges <= 1:
        return 1
    log = math.log(num_edges) if log_base is None else math.log(num_edges, log_base)
    return max(1, int(math.ceil(scale * log)))
