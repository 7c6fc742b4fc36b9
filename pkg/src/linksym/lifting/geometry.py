"""Regions, guard lines and polyline self-intersection."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..linkage import Trajectory


@dataclass(frozen=True)
class Region:
    """Axis-aligned box."""

    id: str
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, pts) -> np.ndarray:
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        return (p[:, 0] >= self.xmin) & (p[:, 0] <= self.xmax) & (p[:, 1] >= self.ymin) & (p[:, 1] <= self.ymax)

    def boundary_clearance(self, pts) -> np.ndarray:
        """Per-point distance (per coordinate) to the nearest box edge line."""
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.minimum.reduce(
            [np.abs(p[:, 0] - self.xmin), np.abs(p[:, 0] - self.xmax), np.abs(p[:, 1] - self.ymin), np.abs(p[:, 1] - self.ymax)]
        )

    def segment_hits(self, p0, p1) -> np.ndarray:
        """Liang-Barsky test of each segment p0[i]->p1[i] against the box."""
        p0 = np.atleast_2d(p0)
        p1 = np.atleast_2d(p1)
        d = p1 - p0
        t0 = np.zeros(p0.shape[0])
        t1 = np.ones(p0.shape[0])
        hit = np.ones(p0.shape[0], dtype=bool)
        for p, q in (
            (-d[:, 0], p0[:, 0] - self.xmin),
            (d[:, 0], self.xmax - p0[:, 0]),
            (-d[:, 1], p0[:, 1] - self.ymin),
            (d[:, 1], self.ymax - p0[:, 1]),
        ):
            parallel = p == 0
            hit &= ~(parallel & (q < 0))
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(parallel, 0.0, q / np.where(parallel, 1.0, p))
            t0 = np.where(~parallel & (p < 0), np.maximum(t0, r), t0)
            t1 = np.where(~parallel & (p > 0), np.minimum(t1, r), t1)
        return hit & (t0 <= t1)


@dataclass(frozen=True)
class Guard:
    """Infinite line through ``point`` along ``direction``."""

    id: str
    point: tuple[float, float]
    direction: tuple[float, float]

    @property
    def normal(self) -> np.ndarray:
        dx, dy = self.direction
        n = math.hypot(dx, dy)
        return np.array([-dy / n, dx / n])

    def signed_distance(self, pts) -> np.ndarray:
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        return (p - np.asarray(self.point)) @ self.normal


def default_region(traj: Trajectory, pad: float = 0.05, region_id: str = "R_in") -> Region:
    """Bounding box of the curve padded by ``pad`` times its diagonal."""
    pts = traj.samples
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    m = pad * float(np.hypot(*(hi - lo)))
    return Region(region_id, lo[0] - m, lo[1] - m, hi[0] + m, hi[1] + m)


def default_guards(traj: Trajectory) -> tuple[Guard, ...]:
    """Major principal axis through the centroid, named L_0."""
    pts = traj.samples
    c = pts.mean(axis=0)
    w, v = np.linalg.eigh(np.cov((pts - c).T) if pts.shape[0] > 1 else np.eye(2))
    major = v[:, int(np.argmax(w))]
    if major[0] < 0 or (major[0] == 0 and major[1] < 0):
        major = -major
    return (Guard("L_0", (float(c[0]), float(c[1])), (float(major[0]), float(major[1]))),)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def segment_pairs(n_segments: int, closed: bool) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, j), j >= i + 2, of non-adjacent polyline segments."""
    i, j = np.triu_indices(n_segments, k=2)
    if closed and n_segments > 2:
        keep = ~((i == 0) & (j == n_segments - 1))
        i, j = i[keep], j[keep]
    return i, j


def orientations(pts: np.ndarray, i: np.ndarray, j: np.ndarray):
    """The four orientation determinants for segment pairs (i, j)."""
    a, b = pts[i], pts[i + 1]
    c, d = pts[j], pts[j + 1]
    ab = b - a
    cd = d - c
    o1 = _cross(ab[:, 0], ab[:, 1], c[:, 0] - a[:, 0], c[:, 1] - a[:, 1])
    o2 = _cross(ab[:, 0], ab[:, 1], d[:, 0] - a[:, 0], d[:, 1] - a[:, 1])
    o3 = _cross(cd[:, 0], cd[:, 1], a[:, 0] - c[:, 0], a[:, 1] - c[:, 1])
    o4 = _cross(cd[:, 0], cd[:, 1], b[:, 0] - c[:, 0], b[:, 1] - c[:, 1])
    return o1, o2, o3, o4


def self_intersections(traj: Trajectory, closed: bool | None = None, dedupe_tol: float | None = None):
    """Distinct self-intersection points of the polyline.

    Touching segments count, so a curve passing exactly through one of its
    own vertices is found. Returns a list of ``(i, j, point)`` sorted by
    ``(i, j)``, one entry per distinct point.
    """
    pts = traj.samples
    n_seg = pts.shape[0] - 1
    if n_seg < 3:
        return []
    if closed is None:
        closed = traj.is_closed(1e-9 * (1.0 + float(np.ptp(pts))))
    i, j = segment_pairs(n_seg, closed)
    o1, o2, o3, o4 = orientations(pts, i, j)
    scale = 1.0 + float(np.ptp(pts))
    eps = 1e-12 * scale * scale
    s1, s2, s3, s4 = (np.where(np.abs(o) <= eps, 0, np.sign(o)) for o in (o1, o2, o3, o4))
    proper = (s1 * s2 < 0) & (s3 * s4 < 0)
    touch = ((s1 * s2 <= 0) & (s3 * s4 <= 0)) & ~proper
    # touching through collinear overlap is ignored unless a true contact exists
    collinear = (s1 == 0) & (s2 == 0)
    cand = (proper | touch) & ~collinear
    ii, jj = i[cand], j[cand]
    if ii.size == 0:
        return []
    a, b = pts[ii], pts[ii + 1]
    c, d = pts[jj], pts[jj + 1]
    r = b - a
    s = d - c
    den = _cross(r[:, 0], r[:, 1], s[:, 0], s[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross(c[:, 0] - a[:, 0], c[:, 1] - a[:, 1], s[:, 0], s[:, 1]) / den
    t = np.clip(np.nan_to_num(t), 0.0, 1.0)
    p = a + t[:, None] * r
    tol = dedupe_tol if dedupe_tol is not None else 1e-9 * scale
    out: list[tuple[int, int, tuple[float, float]]] = []
    for k in np.lexsort((jj, ii)):
        q = p[k]
        if any(math.hypot(q[0] - e[2][0], q[1] - e[2][1]) <= tol for e in out):
            continue
        out.append((int(ii[k]), int(jj[k]), (float(q[0]), float(q[1]))))
    return out


def segment_distances(pts: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Euclidean distance between non-intersecting segments (i, i+1) and (j, j+1)."""
    a, b = pts[i], pts[i + 1]
    c, d = pts[j], pts[j + 1]

    def point_seg(p, s0, s1):
        v = s1 - s0
        L = np.einsum("ij,ij->i", v, v)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(L > 0, np.einsum("ij,ij->i", p - s0, v) / np.where(L > 0, L, 1.0), 0.0)
        t = np.clip(t, 0.0, 1.0)
        q = s0 + t[:, None] * v
        return np.hypot(*(p - q).T)

    return np.minimum.reduce([point_seg(a, c, d), point_seg(b, c, d), point_seg(c, a, b), point_seg(d, a, b)])
