"""Shape scoring: rigid ICP alignment followed by symmetric Chamfer distance."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

ICP_MAX_ITER = 50
ICP_TOL = 1e-9
ICP_STARTS = 4


def _as_points(a) -> np.ndarray:
    pts = np.asarray(getattr(a, "samples", a), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (N, 2) point set, got shape {pts.shape}")
    if pts.shape[0] == 0:
        raise ValueError("point set is empty")
    return pts


def wrap_angle(theta: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.remainder(theta, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class RigidTransform2D:
    rotation: float = 0.0
    translation: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rotation", wrap_angle(float(self.rotation)))
        tx, ty = self.translation
        object.__setattr__(self, "translation", (float(tx), float(ty)))

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        return np.array([[c, -s], [s, c]])

    def apply(self, points) -> np.ndarray:
        pts = _as_points(points)
        return pts @ self.matrix.T + np.asarray(self.translation)

    def compose(self, first: "RigidTransform2D") -> "RigidTransform2D":
        """The transform applying ``first`` then ``self``."""
        t = self.matrix @ np.asarray(first.translation) + np.asarray(self.translation)
        return RigidTransform2D(self.rotation + first.rotation, (t[0], t[1]))

    def inverse(self) -> "RigidTransform2D":
        t = -(self.matrix.T @ np.asarray(self.translation))
        return RigidTransform2D(-self.rotation, (t[0], t[1]))

    @classmethod
    def from_matrix(cls, rot: np.ndarray, trans) -> "RigidTransform2D":
        return cls(math.atan2(rot[1, 0], rot[0, 0]), (trans[0], trans[1]))


IDENTITY = RigidTransform2D()


@dataclass(frozen=True)
class Score:
    chamfer: float
    transform: RigidTransform2D
    iterations_used: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.chamfer) and self.chamfer >= 0):
            raise ValueError(f"chamfer must be finite and non-negative, got {self.chamfer}")


def nearest_distances(a, b) -> np.ndarray:
    """For each point of ``a`` the Euclidean distance to its nearest point of ``b``."""
    pa, pb = _as_points(a), _as_points(b)
    out = np.empty(pa.shape[0])
    chunk = max(1, 2_000_000 // max(pb.shape[0], 1))
    for lo in range(0, pa.shape[0], chunk):
        block = pa[lo : lo + chunk]
        dx = block[:, None, 0] - pb[None, :, 0]
        dy = block[:, None, 1] - pb[None, :, 1]
        out[lo : lo + chunk] = np.sqrt(dx * dx + dy * dy).min(axis=1)
    return out


def chamfer(a, b) -> float:
    """Symmetric Chamfer distance: the mean of both mean nearest-neighbour distances."""
    da = nearest_distances(a, b)
    db = nearest_distances(b, a)
    return (math.fsum(da) / da.size + math.fsum(db) / db.size) / 2.0


def _fit_rigid(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares rotation and translation mapping src onto dst (Kabsch)."""
    cs = src.mean(axis=0)
    cd = dst.mean(axis=0)
    h = (src - cs).T @ (dst - cd)
    u, _, vt = np.linalg.svd(h)
    r = vt.T @ u.T
    if np.linalg.det(r) < 0:
        vt[1, :] *= -1
        r = vt.T @ u.T
    return r, cd - r @ cs


def _principal_angle(pts: np.ndarray) -> float:
    c = pts - pts.mean(axis=0)
    w, v = np.linalg.eigh(c.T @ c)
    major = v[:, int(np.argmax(w))]
    return math.atan2(major[1], major[0])


def _run_icp(src: np.ndarray, tree: cKDTree, dst: np.ndarray, start: RigidTransform2D, max_iter: int, tol: float):
    current = start.apply(src)
    total = start
    dist, idx = tree.query(current)
    err = math.sqrt(float(np.mean(dist * dist)))
    used = 0
    for _ in range(max_iter):
        r, t = _fit_rigid(current, dst[idx])
        step = RigidTransform2D.from_matrix(r, t)
        moved = step.apply(current)
        ndist, nidx = tree.query(moved)
        nerr = math.sqrt(float(np.mean(ndist * ndist)))
        if nerr >= err:
            break
        current, total, idx = moved, step.compose(total), nidx
        used += 1
        improved = err - nerr
        err = nerr
        if improved < tol:
            break
    return total, current, err, used


def _starts(src: np.ndarray, dst: np.ndarray, n_starts: int) -> list[RigidTransform2D]:
    """Candidate initial poses: identity, principal-axis matches, evenly spaced turns."""
    cs, cd = src.mean(axis=0), dst.mean(axis=0)

    def about_centroids(theta: float) -> RigidTransform2D:
        c, s = math.cos(theta), math.sin(theta)
        t = cd - np.array([[c, -s], [s, c]]) @ cs
        return RigidTransform2D(theta, (t[0], t[1]))

    starts = [IDENTITY]
    if src.shape[0] >= 2 and dst.shape[0] >= 2:
        base = _principal_angle(dst) - _principal_angle(src)
        starts += [about_centroids(base), about_centroids(base + math.pi)]
    starts += [about_centroids(2 * math.pi * k / n_starts) for k in range(n_starts)]
    return starts


def icp_align(
    source,
    target,
    max_iter: int = ICP_MAX_ITER,
    tol: float = ICP_TOL,
    n_starts: int = ICP_STARTS,
) -> tuple[RigidTransform2D, np.ndarray, int]:
    """Point-to-point ICP with closed-form SVD steps, rigid only (no scale).

    Each iteration matches every source point to its nearest target point and
    solves for the best rigid motion. Iteration stops when the RMS match
    distance improves by less than ``tol``, would increase, or ``max_iter``
    is hit. Several initial poses are tried and the one ending with the lowest
    Chamfer distance wins; the identity is tried first so an already aligned
    source is returned untouched.

    Returns ``(transform, aligned_source, iterations_used)``.
    """
    src, dst = _as_points(source), _as_points(target)
    if np.allclose(src, src[0]):
        raise ValueError("degenerate source: all points coincide")
    tree = cKDTree(dst)
    best = None
    for start in _starts(src, dst, n_starts):
        total, aligned, _, used = _run_icp(src, tree, dst, start, max_iter, tol)
        cd = chamfer(aligned, dst)
        if best is None or cd < best[0]:
            best = (cd, total, aligned, used)
        if cd == 0.0:
            break
    _, total, aligned, used = best
    return total, aligned, used


def score(source, target, **icp_kwargs) -> Score:
    transform, aligned, used = icp_align(source, target, **icp_kwargs)
    return Score(chamfer(aligned, target), transform, used)


def improvement_pct(cd_initial: float, cd_final: float) -> float:
    if cd_initial == 0:
        raise ValueError("initial Chamfer distance is zero; improvement is undefined")
    return 100.0 * (cd_initial - cd_final) / cd_initial


def mean_se(values) -> tuple[float, float]:
    """Mean and standard error (sample standard deviation / sqrt(n))."""
    v = [float(x) for x in values]
    n = len(v)
    if n == 0:
        return math.nan, math.nan
    mean = math.fsum(v) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in v) / (n - 1)
    return mean, math.sqrt(var / n)
