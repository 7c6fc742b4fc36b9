"""Finite-difference kinematics and hysteretic sign tokens."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linkage import Trajectory
from .config import LiftingConfig


def wrap_pi(a):
    """Wrap angles to [-pi, pi)."""
    return (np.asarray(a) + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True, eq=False)
class KinematicProxies:
    """Per-sample kinematics, all arrays index-aligned with the trajectory."""

    velocities: np.ndarray
    speeds: np.ndarray
    accelerations: np.ndarray
    headings: np.ndarray
    heading_changes: np.ndarray
    curvatures: np.ndarray
    dt: float = 1.0

    def __len__(self) -> int:
        return self.speeds.shape[0]


def velocities(pts: np.ndarray, dt: float = 1.0) -> np.ndarray:
    """Forward difference at the start, backward at the end, centred inside."""
    v = np.empty_like(pts)
    v[0] = (pts[1] - pts[0]) / dt
    v[-1] = (pts[-1] - pts[-2]) / dt
    v[1:-1] = (pts[2:] - pts[:-2]) / (2.0 * dt)
    return v


def accelerations(pts: np.ndarray, dt: float = 1.0) -> np.ndarray:
    """Three-point stencil inside; endpoints copy the nearest interior value."""
    a = np.empty_like(pts)
    a[1:-1] = (pts[2:] - 2.0 * pts[1:-1] + pts[:-2]) / (dt * dt)
    a[0] = a[1]
    a[-1] = a[-2]
    return a


def curvature(v: np.ndarray, a: np.ndarray, singular: float = 1e-12) -> np.ndarray:
    num = v[:, 0] * a[:, 1] - v[:, 1] * a[:, 0]
    den = (v[:, 0] ** 2 + v[:, 1] ** 2) ** 1.5
    k = np.zeros_like(num)
    ok = den >= singular
    k[ok] = num[ok] / den[ok]
    return k


def proxies(traj: Trajectory, dt: float = 1.0, singular: float = 1e-12) -> KinematicProxies:
    pts = traj.samples
    if pts.shape[0] < 3:
        raise ValueError("proxies need a trajectory of at least 3 samples")
    v = velocities(pts, dt)
    a = accelerations(pts, dt)
    k = curvature(v, a, singular)
    k[0] = k[1]
    k[-1] = k[-2]
    heading = np.arctan2(v[:, 1], v[:, 0])
    change = np.zeros_like(heading)
    change[1:] = np.abs(wrap_pi(np.diff(heading)))
    speed = np.hypot(v[:, 0], v[:, 1])
    for arr in (v, a, k, heading, change, speed):
        arr.setflags(write=False)
    return KinematicProxies(v, speed, a, heading, change, k, dt)


def hysteretic_sign(signal, margin: float) -> np.ndarray:
    """Sign with a dead band of +-``margin``.

    The output switches to +1 only when the signal exceeds ``margin`` and to
    -1 only when it drops below ``-margin``; inside the band it keeps its
    previous value. Samples before the first excursion take the sign of that
    excursion; a signal that never leaves the band maps to all zeros.
    """
    if not margin > 0:
        raise ValueError("margin must be positive")
    x = np.asarray(signal, dtype=float)
    raw = np.where(x > margin, 1, np.where(x < -margin, -1, 0))
    out = np.zeros(x.shape[0], dtype=int)
    hits = np.flatnonzero(raw)
    if hits.size == 0:
        return out
    state = raw[hits[0]]
    for i, r in enumerate(raw):
        if r != 0:
            state = r
        out[i] = state
    return out


@dataclass(frozen=True, eq=False)
class QualSignature:
    """Pointwise tokens: curvature polarity and x/y velocity monotonicity."""

    s_kappa: np.ndarray
    m_x: np.ndarray
    m_y: np.ndarray

    def __len__(self) -> int:
        return self.s_kappa.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QualSignature):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.rows(), other.rows()))

    __hash__ = None  # type: ignore[assignment]

    def rows(self):
        return (self.s_kappa, self.m_x, self.m_y)

    def at(self, i: int) -> tuple[int, int, int]:
        return int(self.s_kappa[i]), int(self.m_x[i]), int(self.m_y[i])


def signature(px: KinematicProxies, config: LiftingConfig = LiftingConfig()) -> QualSignature:
    return QualSignature(
        hysteretic_sign(px.curvatures, config.curvature_tol),
        hysteretic_sign(px.velocities[:, 0], config.mono_margin),
        hysteretic_sign(px.velocities[:, 1], config.mono_margin),
    )
