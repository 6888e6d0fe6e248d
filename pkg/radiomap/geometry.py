"""Planar segment predicates used by map matching and the propagation model.

All predicates use exact orientation tests with an absolute tolerance of
1e-9 for collinearity, so they are deterministic and symmetric.
"""
import numpy as np

from radiomap.models import Floorplan, Point

EPS = 1e-9


def _orientation(p: Point, q: Point, r: Point) -> int:
    value = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    if abs(value) <= EPS:
        return 0
    return 1 if value > 0 else -1


def _within_box(p: Point, q: Point, r: Point) -> bool:
    """q lies in the bounding box of p-r."""
    return bool(min(p[0], r[0]) - EPS <= q[0] <= max(p[0], r[0]) + EPS
                and min(p[1], r[1]) - EPS <= q[1] <= max(p[1], r[1]) + EPS)


def segments_intersect(a1: Point, a2: Point, b1: Point, b2: Point) -> bool:
    """True iff the closed segments a1-a2 and b1-b2 share at least one point.

    Collinear overlap counts as an intersection; a zero-length segment is a point.
    """
    o1 = _orientation(a1, a2, b1)
    o2 = _orientation(a1, a2, b2)
    o3 = _orientation(b1, b2, a1)
    o4 = _orientation(b1, b2, a2)

    if o1 != o2 and o3 != o4:
        return True

    return ((o1 == 0 and _within_box(a1, b1, a2))
            or (o2 == 0 and _within_box(a1, b2, a2))
            or (o3 == 0 and _within_box(b1, a1, b2))
            or (o4 == 0 and _within_box(b1, a2, b2)))


def crosses_wall(plan: Floorplan, a: Point, b: Point) -> bool:
    return any(segments_intersect(a, b, (x1, y1), (x2, y2)) for x1, y1, x2, y2 in plan.walls)


def _orientation_array(px, py, qx, qy, rx, ry) -> np.ndarray:
    value = (qx - px) * (ry - py) - (qy - py) * (rx - px)
    return np.where(np.abs(value) <= EPS, 0, np.sign(value)).astype(np.int8)


def _within_box_array(px, py, qx, qy, rx, ry) -> np.ndarray:
    return ((np.minimum(px, rx) - EPS <= qx) & (qx <= np.maximum(px, rx) + EPS)
            & (np.minimum(py, ry) - EPS <= qy) & (qy <= np.maximum(py, ry) + EPS))


def intersection_matrix(starts: np.ndarray, ends: np.ndarray, walls: np.ndarray) -> np.ndarray:
    """(N, W) boolean matrix: segment i (starts[i]-ends[i]) touches wall j.

    Same predicate as `segments_intersect`, evaluated for every pair at once.
    """
    starts = np.asarray(starts, dtype=float).reshape(-1, 2)
    ends = np.asarray(ends, dtype=float).reshape(-1, 2)
    walls = np.asarray(walls, dtype=float).reshape(-1, 4)
    if walls.shape[0] == 0 or starts.shape[0] == 0:
        return np.zeros((starts.shape[0], walls.shape[0]), dtype=bool)

    ax1, ay1 = starts[:, 0:1], starts[:, 1:2]
    ax2, ay2 = ends[:, 0:1], ends[:, 1:2]
    bx1, by1, bx2, by2 = (walls[:, i][np.newaxis, :] for i in range(4))

    o1 = _orientation_array(ax1, ay1, ax2, ay2, bx1, by1)
    o2 = _orientation_array(ax1, ay1, ax2, ay2, bx2, by2)
    o3 = _orientation_array(bx1, by1, bx2, by2, ax1, ay1)
    o4 = _orientation_array(bx1, by1, bx2, by2, ax2, ay2)

    general = (o1 != o2) & (o3 != o4)
    touching = (((o1 == 0) & _within_box_array(ax1, ay1, bx1, by1, ax2, ay2))
                | ((o2 == 0) & _within_box_array(ax1, ay1, bx2, by2, ax2, ay2))
                | ((o3 == 0) & _within_box_array(bx1, by1, ax1, ay1, bx2, by2))
                | ((o4 == 0) & _within_box_array(bx1, by1, ax2, ay2, bx2, by2)))
    return general | touching


def crossing_counts(plan: Floorplan, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Number of walls each segment touches."""
    return intersection_matrix(starts, ends, plan.wall_array()).sum(axis=1)


def crosses_any_wall(plan: Floorplan, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    return intersection_matrix(starts, ends, plan.wall_array()).any(axis=1)


def inside_bounds(plan: Floorplan, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    b = plan.bounds
    return ((points[:, 0] >= b.xmin) & (points[:, 0] <= b.xmax)
            & (points[:, 1] >= b.ymin) & (points[:, 1] <= b.ymax))
