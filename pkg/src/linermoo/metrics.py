"""Two-objective front indicators (minimization)."""

from __future__ import annotations

import numpy as np


def _as_points(front) -> np.ndarray:
    pts = np.asarray(front, dtype=float)
    if pts.size == 0:
        return pts.reshape(0, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected an (n, 2) array of objective vectors")
    return pts


def _check_ref(pts: np.ndarray, ref) -> np.ndarray:
    ref = np.asarray(ref, dtype=float)
    if ref.shape != (2,):
        raise ValueError("reference point must have two coordinates")
    bad = ~np.all(pts < ref, axis=1)
    if bad.any():
        raise ValueError(f"point {pts[np.argmax(bad)].tolist()} does not strictly dominate the reference point")
    return ref


def hypervolume_2d(front, ref) -> float:
    """Area dominated by ``front`` and bounded by ``ref``.

    Dominated points and duplicates are allowed; they add nothing.
    """
    pts = _as_points(front)
    ref = _check_ref(pts, ref)
    if len(pts) == 0:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    area = 0.0
    level = ref[1]
    for x, y in pts[order]:
        if y < level:
            area += (ref[0] - x) * (level - y)
            level = y
    return float(area)


def hv_contribution(front, idx: int, ref) -> float:
    """Exclusive contribution of point ``idx``: H(front) minus H(front without idx)."""
    pts = _as_points(front)
    return hypervolume_2d(pts, ref) - hypervolume_2d(np.delete(pts, idx, axis=0), ref)


def hv_contributions(front, ref) -> np.ndarray:
    """Exclusive contribution of every point at once.

    Uses neighbour rectangles on the sorted nondominated set. Dominated points
    and all copies of a duplicated vector contribute zero. Falls back to the
    pairwise definition if a dominated point could be uncovered by a removal.
    """
    pts = _as_points(front)
    ref = _check_ref(pts, ref)
    n = len(pts)
    out = np.zeros(n)
    if n == 0:
        return out
    nd = pareto_mask(pts)
    if not nd.all():
        return np.array([hv_contribution(pts, i, ref) for i in range(n)])
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    s = pts[order]
    # mutually nondominated: x ascending means y strictly descending, except copies
    same_next = np.zeros(n, dtype=bool)
    same_next[:-1] = np.all(s[1:] == s[:-1], axis=1)
    dup = same_next.copy()
    dup[1:] |= same_next[:-1]
    keep = ~dup
    u = s[keep]
    if len(u):
        # neighbours must include the duplicated vectors, which still cover area
        all_x_next = np.append(s[1:, 0], ref[0])
        all_y_prev = np.insert(s[:-1, 1], 0, ref[1])
        x_next = all_x_next[keep]
        y_prev = all_y_prev[keep]
        contrib = (x_next - u[:, 0]) * (y_prev - u[:, 1])
        vals = np.zeros(n)
        vals[keep] = contrib
        out[order] = vals
    return out


def pareto_mask(points) -> np.ndarray:
    """True for points that no other point dominates (copies are all kept)."""
    pts = _as_points(points)
    n = len(pts)
    if n == 0:
        return np.zeros(0, dtype=bool)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    s = pts[order]
    new_vec = np.ones(n, dtype=bool)
    new_vec[1:] = np.any(s[1:] != s[:-1], axis=1)
    group_start = np.maximum.accumulate(np.where(new_vec, np.arange(n), 0))
    before = np.empty(n)
    before[0] = np.inf
    before[1:] = np.minimum.accumulate(s[:-1, 1])
    mask = np.empty(n, dtype=bool)
    mask[order] = before[group_start] > s[:, 1]
    return mask


def nondominated_front(points) -> np.ndarray:
    """Unique nondominated vectors, sorted by the first objective."""
    pts = _as_points(points)
    if len(pts) == 0:
        return pts
    front = np.unique(pts[pareto_mask(pts)], axis=0)
    return front[np.lexsort((front[:, 1], front[:, 0]))]


def epsilon_indicator(front_a, front_b) -> float:
    """Smallest additive shift eps such that every b is weakly dominated by some a - eps."""
    a = _as_points(front_a)
    b = _as_points(front_b)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("fronts must be nonempty")
    diff = np.max(a[:, None, :] - b[None, :, :], axis=2)
    return float(np.max(np.min(diff, axis=0)))


def reference_point(points, margin: float = 0.1) -> np.ndarray:
    """Nadir pushed outward by ``margin`` of its magnitude (1.0 where the nadir is 0)."""
    pts = _as_points(points)
    nadir = pts.max(axis=0)
    pad = np.where(nadir == 0.0, 1.0, margin * np.abs(nadir))
    return nadir + pad
