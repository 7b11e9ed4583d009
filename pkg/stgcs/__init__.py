from . import utils
from . import src

from .src import (
    File,
    State,
    Segment,
    HPoly,
    SpaceTimeGraph,
    build_graph,
    VelocityBounds,
    Trajectory,
    SolveParams,
    solve_stgcs,
    Reservation,
    reserve,
    MrmpInstance,
    RobotTask,
    Solution,
    sp,
    rp,
    pbs,
    validate,
    metrics,
    get_map,
)
from .src import bench_io
from .src.bench_io import InstanceFile, load_instance, save_instance, gen_instances, run_bench
from .utils import BenchConfig, MultiProcessPipeline, get_logger, set_verbosity
from ._version import __version__

__all__ = [
    "File",
    "State",
    "Segment",
    "HPoly",
    "SpaceTimeGraph",
    "build_graph",
    "VelocityBounds",
    "Trajectory",
    "SolveParams",
    "solve_stgcs",
    "Reservation",
    "reserve",
    "MrmpInstance",
    "RobotTask",
    "Solution",
    "sp",
    "rp",
    "pbs",
    "validate",
    "metrics",
    "get_map",
    "InstanceFile",
    "load_instance",
    "save_instance",
    "gen_instances",
    "run_bench",
    "BenchConfig",
    "MultiProcessPipeline",
    "get_logger",
    "set_verbosity",
]
