"""Dominance, non-dominated sorting, crowding distance, and hypervolume.

All machinery runs on minimization-canonical arrays: maximized objectives are
negated on the way in. Public functions take and return natural-sign values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .objectives import DIRECTIONS, MAXIMIZE, ObjectiveVector, Trial, TrialStore


def _signs(directions: Sequence[str]) -> np.ndarray:
    return np.array([-1.0 if d == MAXIMIZE else 1.0 for d in directions])


def to_minimization(points, directions: Sequence[str] = DIRECTIONS) -> np.ndarray:
    """Return an ``(n, m)`` float array with maximized columns negated."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr * _signs(directions)


def dominates(a: Sequence[float], b: Sequence[float], directions: Sequence[str] = DIRECTIONS) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    strictly = False
    for x, y, d in zip(a, b, directions):
        if d == MAXIMIZE:
            x, y = -x, -y
        if x > y:
            return False
        if x < y:
            strictly = True
    return strictly


def _dominance_matrix(m: np.ndarray) -> np.ndarray:
    le = (m[:, None, :] <= m[None, :, :]).all(axis=2)
    lt = (m[:, None, :] < m[None, :, :]).any(axis=2)
    return le & lt


def non_dominated_sort(points, directions: Sequence[str] = DIRECTIONS) -> list[list[int]]:
    """Partition point indices into fronts F0, F1, ... (fast non-dominated sort)."""
    m = to_minimization(points, directions)
    n = len(m)
    if n == 0:
        return []
    dom = _dominance_matrix(m)
    counts = dom.sum(axis=0)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append(current.tolist())
        counts = counts - dom[current].sum(axis=0)
        counts[current] = -1
        current = np.flatnonzero(counts == 0)
    return fronts


def crowding_distance(points, directions: Sequence[str] = DIRECTIONS) -> np.ndarray:
    """Per-member crowding distance within one front.

    Boundary members of every objective get ``inf``; objectives with zero
    range contribute nothing.
    """
    m = to_minimization(points, directions)
    n, k = m.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for j in range(k):
        order = np.argsort(m[:, j], kind="stable")
        col = m[order, j]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = col[-1] - col[0]
        if span == 0:
            continue
        dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


@dataclass
class ParetoFront:
    members: list
    directions: tuple = DIRECTIONS

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def objective_matrix(self) -> np.ndarray:
        return np.array([t.objectives for t in self.members], dtype=float)


def non_dominated_mask(points, directions: Sequence[str] = DIRECTIONS) -> np.ndarray:
    """Boolean mask of points no other point dominates; duplicates all survive."""
    m = to_minimization(points, directions)
    keep = np.ones(len(m), dtype=bool)
    for i in range(len(m)):
        le = (m <= m[i]).all(axis=1)
        lt = (m < m[i]).any(axis=1)
        if (le & lt).any():
            keep[i] = False
    return keep


def extract_front(source: TrialStore | Iterable[Trial], directions: Sequence[str] = DIRECTIONS) -> ParetoFront:
    """Maximal non-dominated subset of the unique trials in ``source``."""
    trials = list(source)
    if not trials:
        raise ValueError("cannot extract a front from an empty trial set")
    mask = non_dominated_mask([t.objectives for t in trials], directions)
    return ParetoFront([t for t, k in zip(trials, mask) if k], tuple(directions))


def _hv_min(points: np.ndarray, ref: np.ndarray) -> float:
    # points are minimization-canonical and weakly dominate ref
    if len(points) == 0:
        return 0.0
    k = points.shape[1]
    if k == 1:
        return float(ref[0] - points[:, 0].min())
    if k == 2:
        pts = points[np.lexsort((points[:, 1], points[:, 0]))]
        area, best_y = 0.0, ref[1]
        for x, y in pts:
            if y < best_y:
                area += (ref[0] - x) * (best_y - y)
                best_y = y
        return float(area)
    order = np.argsort(points[:, -1], kind="stable")
    pts = points[order]
    volume = 0.0
    for i in range(len(pts)):
        upper = pts[i + 1, -1] if i + 1 < len(pts) else ref[-1]
        depth = upper - pts[i, -1]
        if depth > 0:
            volume += depth * _hv_min(pts[: i + 1, :-1], ref[:-1])
    return float(volume)


def hypervolume(front: ParetoFront | Iterable, reference_point: Sequence[float],
                directions: Sequence[str] | None = None, strict: bool = True) -> float:
    """Exact dominated hypervolume of ``front`` relative to ``reference_point``.

    Accepts a :class:`ParetoFront`, trials, or raw objective vectors in
    natural signs. With ``strict`` every point must weakly dominate the
    reference point; otherwise points outside the reference box are dropped
    (they bound no volume).
    """
    if isinstance(front, ParetoFront):
        directions = directions or front.directions
        rows = [t.objectives for t in front.members]
    else:
        rows = [t.objectives if isinstance(t, Trial) else t for t in front]
    directions = directions or DIRECTIONS
    if not rows:
        return 0.0
    pts = to_minimization(rows, directions)
    ref = to_minimization(reference_point, directions)[0]
    outside = (pts > ref).any(axis=1)
    if not strict:
        pts = pts[~outside]
        if len(pts) == 0:
            return 0.0
    elif outside.any():
        bad = np.flatnonzero(outside)
        raise ValueError(f"reference point {tuple(reference_point)} is not dominated by member {bad[0]}")
    pts = pts[non_dominated_mask(pts, ["minimize"] * pts.shape[1])]
    return _hv_min(np.unique(pts, axis=0), ref)


def reference_point(front: ParetoFront | Iterable, margin: float = 0.1,
                    directions: Sequence[str] = DIRECTIONS) -> ObjectiveVector | tuple:
    """Nadir of ``front`` worsened by ``margin`` times each objective's range."""
    rows = [t.objectives if isinstance(t, Trial) else t for t in front]
    m = to_minimization(rows, directions)
    lo, hi = m.min(axis=0), m.max(axis=0)
    ref = (hi + margin * (hi - lo)) * _signs(directions)
    values = tuple(float(v) for v in ref)
    return ObjectiveVector(*values) if len(values) == 3 else values
