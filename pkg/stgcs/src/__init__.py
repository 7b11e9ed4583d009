from .constants import TOL, EPSILON, T_MAX, TIME_BUDGET_S, SCHEMA_VERSION
from .errors import (
    STGCSError,
    ContractError,
    EmptySetError,
    UnsupportedDimensionError,
    UnboundedError,
    SolverError,
    CoverageError,
    LoadError,
    CrowdingError,
)
from .core import File
from .geom import (
    State,
    Segment,
    HPoly,
    Tube,
    Halfspace,
    contains,
    chebyshev_ball,
    is_empty,
    is_usable,
    intersect,
    intersects_interior,
    extrude_time,
    segment_tube,
    side_faces,
    clip_segment,
    bounding_box,
    time_interval_at,
)
from .stgraph import SpaceTimeGraph, build_graph, start_vertices, goal_vertices, insert_decomposition
from .gcsprog import (
    VelocityBounds,
    Trajectory,
    FlowSolution,
    SolveParams,
    SolveResult,
    FailureReason,
    restriction,
    relaxation,
    round_paths,
    solve_stgcs,
)
from .ecd import Reservation, VertexSegment, canonicalize, vertex_segment_sequence, decompose_one, reserve, reserve_all
from .mrmp import (
    MrmpInstance,
    RobotTask,
    PriorityNode,
    Solution,
    PlanResult,
    PbsOptions,
    ValidationReport,
    collide,
    min_separation,
    first_collision,
    sp,
    rp,
    pbs,
    plan,
    validate,
    metrics,
)
from .maps import MapCatalogEntry, MAP_NAMES, get_map
