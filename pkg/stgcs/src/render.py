"""Top-down SVG view of a 2D solution: free space, obstacle sweeps and robot paths.

Later states are drawn more transparent. Output is byte-stable for identical inputs.
"""

from typing import List

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection
from matplotlib.patches import Polygon, Rectangle
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .core import File
from .errors import UnsupportedDimensionError
from .geom import HPoly
from .mrmp import MrmpInstance, Solution
from .type_utils import PathLike
from ..utils import logger

plt.rcParams['svg.hashsalt'] = 'stgcs'

MIN_ALPHA = 0.15


def polygon_vertices(S: HPoly) -> np.ndarray:
    """Counter-clockwise vertices of a bounded, full-dimensional 2D set."""
    _, center = S.chebyshev
    hs = HalfspaceIntersection(np.hstack([S.A, -S.b[:, None]]), center)
    pts = hs.intersections
    return pts[ConvexHull(pts).vertices]


def _sweep_polygon(p0: np.ndarray, p1: np.ndarray, r: float) -> np.ndarray:
    corners = np.array([[-r, -r], [r, -r], [r, r], [-r, r]])
    pts = np.vstack([p0 + corners, p1 + corners])
    if np.allclose(p0, p1):
        return p0 + corners
    return pts[ConvexHull(pts).vertices]


def _robot_colors(n: int) -> List:
    cmap = plt.get_cmap('tab10')
    return [cmap(i % 10) for i in range(n)]


def emit_svg(solution: Solution, instance: MrmpInstance, path: PathLike) -> PathLike:
    """Write an SVG with one `robot-<i>` line group per trajectory."""
    if instance.graph.d != 2:
        raise UnsupportedDimensionError(f'SVG output needs d = 2, got d = {instance.graph.d}')
    t_max = instance.t_max
    fig, ax = plt.subplots(figsize=(6, 6))
    for S in _spatial_sets(instance):
        ax.add_patch(Polygon(polygon_vertices(S), closed=True, facecolor='0.92', edgecolor='0.6', linewidth=0.5))

    for k, obs in enumerate(instance.dynamic_obstacles):
        pos = obs.trajectory.positions
        for p0, p1 in zip(pos[:-1], pos[1:]):
            ax.add_patch(Polygon(_sweep_polygon(p0, p1, obs.tube_apothem), closed=True,
                                 facecolor='tab:red', alpha=0.15, edgecolor='none', gid=f'obstacle-{k}'))
        ax.plot(pos[:, 0], pos[:, 1], color='tab:red', linewidth=0.8, linestyle='--')

    a = instance.safe_radius / 2
    for i, (traj, color) in enumerate(zip(solution.trajectories, _robot_colors(len(solution.trajectories)))):
        pos, times = traj.positions, traj.times
        segs = np.stack([pos[:-1], pos[1:]], axis=1) if len(pos) > 1 else np.empty((0, 2, 2))
        mid_t = 0.5 * (times[:-1] + times[1:]) if len(times) > 1 else np.empty(0)
        alphas = 1.0 - (1.0 - MIN_ALPHA) * np.clip(mid_t / t_max, 0.0, 1.0)
        colors = [(*color[:3], float(al)) for al in alphas]
        ax.add_collection(LineCollection(segs, colors=colors, linewidths=2.0, gid=f'robot-{i}'))
        ax.add_patch(Rectangle(pos[0] - a, 2 * a, 2 * a, facecolor=color, edgecolor='none'))
        ax.add_patch(Rectangle(pos[-1] - a, 2 * a, 2 * a, facecolor='none', edgecolor=color, linewidth=1.0))

    ax.set_aspect('equal')
    ax.autoscale_view()
    ax.set_xticks([])
    ax.set_yticks([])
    File.mkdirs(File.getdir(path))
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    logger.info(f'Wrote {len(solution.trajectories)} trajectories to {path}')
    return path


def _spatial_sets(instance: MrmpInstance) -> List[HPoly]:
    """Spatial cross-sections of the static graph's extruded sets."""
    out = []
    for X in instance.static_graph.vertices.values():
        A, b = X.A, X.b
        spatial = np.any(A[:, :-1] != 0, axis=1)
        out.append(HPoly(A[spatial, :-1], b[spatial]))
    return out
