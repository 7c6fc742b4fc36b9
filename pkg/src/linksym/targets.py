"""The six benchmark target curves.

Closed curves are sampled at ``n_points`` uniform parameter values and get a
closing sample equal to the first one; open curves get exactly ``n_points``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import numpy as np

from .linkage import Trajectory

DEFAULT_BOX = (0.0, 10.0)


class ShapeKind(str, Enum):
    PARABOLA = "parabola"
    NACA = "naca"
    LINE = "line"
    ELLIPSE = "ellipse"
    CIRCLE = "circle"
    LEMNISCATE = "lemniscate"

    @property
    def closed(self) -> bool:
        return self not in (ShapeKind.LINE, ShapeKind.PARABOLA)

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    ShapeKind.PARABOLA: "Parabola",
    ShapeKind.NACA: "NACA",
    ShapeKind.LINE: "Line",
    ShapeKind.ELLIPSE: "Ellipse",
    ShapeKind.CIRCLE: "Circle",
    ShapeKind.LEMNISCATE: "LB",
}

_ALIASES = {
    "naca-airfoil": ShapeKind.NACA,
    "naca_airfoil": ShapeKind.NACA,
    "airfoil": ShapeKind.NACA,
    "lb": ShapeKind.LEMNISCATE,
    "straight": ShapeKind.LINE,
    "straight-line": ShapeKind.LINE,
}

DEFAULT_PARAMS: dict[ShapeKind, dict[str, Any]] = {
    ShapeKind.CIRCLE: {"center": (0.0, 0.0), "radius": 1.0},
    ShapeKind.ELLIPSE: {"center": (0.0, 0.0), "a": 2.0, "b": 1.0},
    ShapeKind.LINE: {"start": (0.0, 0.0), "end": (1.0, 0.0)},
    ShapeKind.PARABOLA: {"center": (0.0, 0.0), "scale": 1.0, "c": 1.0},
    ShapeKind.LEMNISCATE: {"center": (0.0, 0.0), "a": 1.0},
    ShapeKind.NACA: {"code": "2412", "chord": 1.0, "center": (0.0, 0.0)},
}


def shape_kind(name: str | ShapeKind) -> ShapeKind:
    if isinstance(name, ShapeKind):
        return name
    key = name.strip().lower()
    if key in _ALIASES:
        return _ALIASES[key]
    try:
        return ShapeKind(key)
    except ValueError:
        raise ValueError(f"unknown shape {name!r}; expected one of {[k.value for k in ShapeKind]}") from None


@dataclass(frozen=True)
class TargetShape:
    kind: ShapeKind
    params: Mapping[str, Any] = field(default_factory=dict)
    n_points: int = 100

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", shape_kind(self.kind))
        merged = dict(DEFAULT_PARAMS[self.kind])
        merged.update(self.params)
        object.__setattr__(self, "params", merged)
        minimum = 3 if self.kind.closed else 2
        if self.n_points < minimum:
            raise ValueError(f"{self.kind.value} needs at least {minimum} points")
        for key in ("radius", "a", "b", "scale", "chord"):
            if key in merged and not merged[key] > 0:
                raise ValueError(f"{self.kind.value}: {key} must be positive")


def _closed_params(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n + 1) / n


def _circle(p, n):
    t = _closed_params(n)
    cx, cy = p["center"]
    pts = np.column_stack((cx + p["radius"] * np.cos(t), cy + p["radius"] * np.sin(t)))
    pts[-1] = pts[0]
    return pts


def _ellipse(p, n):
    t = _closed_params(n)
    cx, cy = p["center"]
    pts = np.column_stack((cx + p["a"] * np.cos(t), cy + p["b"] * np.sin(t)))
    pts[-1] = pts[0]
    return pts


def _line(p, n):
    s = np.linspace(0.0, 1.0, n)[:, None]
    a = np.asarray(p["start"], dtype=float)
    b = np.asarray(p["end"], dtype=float)
    return a + s * (b - a)


def _parabola(p, n):
    t = np.linspace(-1.0, 1.0, n)
    cx, cy = p["center"]
    k = p["scale"]
    return np.column_stack((cx + k * t, cy + k * p["c"] * t * t))


def _lemniscate(p, n):
    """Lemniscate of Bernoulli, (x^2 + y^2)^2 = a^2 (x^2 - y^2)."""
    t = _closed_params(n)
    a = p["a"]
    cx, cy = p["center"]
    den = 1.0 + np.sin(t) ** 2
    pts = np.column_stack((cx + a * np.cos(t) / den, cy + a * np.sin(t) * np.cos(t) / den))
    pts[-1] = pts[0]
    return pts


def naca_thickness(x: np.ndarray, tau: float) -> np.ndarray:
    return 5.0 * tau * (0.2969 * np.sqrt(x) - 0.1260 * x - 0.3516 * x**2 + 0.2843 * x**3 - 0.1015 * x**4)


def naca_camber(x: np.ndarray, m: float, pos: float) -> tuple[np.ndarray, np.ndarray]:
    """Mean camber line and its slope for a 4-digit section."""
    yc = np.zeros_like(x)
    dyc = np.zeros_like(x)
    if m == 0 or pos == 0:
        return yc, dyc
    fore = x < pos
    aft = ~fore
    yc[fore] = m / pos**2 * (2 * pos * x[fore] - x[fore] ** 2)
    dyc[fore] = 2 * m / pos**2 * (pos - x[fore])
    yc[aft] = m / (1 - pos) ** 2 * ((1 - 2 * pos) + 2 * pos * x[aft] - x[aft] ** 2)
    dyc[aft] = 2 * m / (1 - pos) ** 2 * (pos - x[aft])
    return yc, dyc


def _naca(p, n):
    code = str(p["code"])
    if len(code) != 4 or not code.isdigit():
        raise ValueError(f"NACA code must be 4 digits, got {code!r}")
    m, pos, tau = int(code[0]) / 100, int(code[1]) / 10, int(code[2:]) / 100
    chord = p["chord"]
    cx, cy = p["center"]
    n_upper = n // 2 + 1
    n_lower = n - n_upper + 1
    # cosine spacing; upper runs trailing edge -> leading edge, lower back again
    xu = 0.5 * (1 + np.cos(np.linspace(0.0, np.pi, n_upper)))
    xl = 0.5 * (1 - np.cos(np.linspace(0.0, np.pi, n_lower)))[1:]

    def surface(x, sign):
        yt = naca_thickness(x, tau)
        yc, dyc = naca_camber(x, m, pos)
        th = np.arctan(dyc)
        return np.column_stack((x - sign * yt * np.sin(th), yc + sign * yt * np.cos(th)))

    pts = np.vstack((surface(xu, 1.0), surface(xl, -1.0)))
    pts = np.vstack((pts, pts[:1]))
    pts *= chord
    pts[:, 0] += cx - 0.5 * chord
    pts[:, 1] += cy
    return pts


_BUILDERS = {
    ShapeKind.CIRCLE: _circle,
    ShapeKind.ELLIPSE: _ellipse,
    ShapeKind.LINE: _line,
    ShapeKind.PARABOLA: _parabola,
    ShapeKind.LEMNISCATE: _lemniscate,
    ShapeKind.NACA: _naca,
}


def generate(shape: TargetShape) -> Trajectory:
    pts = _BUILDERS[shape.kind](shape.params, shape.n_points)
    return Trajectory(pts, 1.0 / max(len(pts) - 1, 1))


def normalize(traj: Trajectory, box: tuple[float, float] = DEFAULT_BOX) -> Trajectory:
    """Scale uniformly and translate so the curve fills and centres in the square box."""
    lo, hi = box
    pts = traj.samples
    mins = pts.min(axis=0)
    maxs = pts.max(axis=0)
    extent = float(np.max(maxs - mins))
    if extent == 0:
        raise ValueError("cannot normalise a degenerate curve")
    s = (hi - lo) / extent
    centre = 0.5 * (mins + maxs)
    out = (pts - centre) * s + 0.5 * (lo + hi)
    return Trajectory(out, traj.dt)


def make_target(
    kind: str | ShapeKind,
    n_points: int = 100,
    scale: float | None = None,
    box: tuple[float, float] = DEFAULT_BOX,
    **params: Any,
) -> Trajectory:
    """Generate a target and fit it into ``box``; ``scale`` shrinks it about the box centre."""
    traj = normalize(generate(TargetShape(shape_kind(kind), params, n_points)), box)
    if scale is not None and scale != 1.0:
        if not scale > 0:
            raise ValueError("scale must be positive")
        mid = 0.5 * (box[0] + box[1])
        traj = Trajectory((traj.samples - mid) * scale + mid, traj.dt)
    return traj


def write_csv(traj: Trajectory, path) -> None:
    """Two columns x,y and no header."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for x, y in traj.samples:
            w.writerow([repr(float(x)), repr(float(y))])


def read_csv(path) -> Trajectory:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(float(a), float(b)) for a, b in csv.reader(fh)]
    return Trajectory(np.array(rows))


def describe(traj: Trajectory, kind: str | None = None) -> str:
    """Short text summary of a target for agent prompts."""
    pts = traj.samples
    mins, maxs = pts.min(axis=0), pts.max(axis=0)
    closed = "closed" if traj.is_closed() else "open"
    head = f"{kind} target, " if kind else ""
    return (
        f"{head}{closed} curve with {len(traj)} samples, bounding box "
        f"x=[{mins[0]:.3f}, {maxs[0]:.3f}], y=[{mins[1]:.3f}, {maxs[1]:.3f}], "
        f"path length {float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1))):.3f}"
    )
