"""Planar linkage model, validation, mobility and position simulation.

A linkage is an ordered list of joints. Fixed joints are ground pivots, the
single crank rotates about its anchor, and every revolute joint sits at one
of the two intersections of the circles around its two parents. Joints are
solved in declaration order, so every parent must be declared before its
child.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np

DEFAULT_STEPS = 100


class LinkageError(ValueError):
    """Raised when an operation needs a valid linkage and gets an invalid one."""

    def __init__(self, message: str, diagnostics: Sequence["Diagnostic"] = ()):
        super().__init__(message)
        self.diagnostics = tuple(diagnostics)


class LinkageParseError(ValueError):
    """The text is not a linkage document matching the JSON contract."""


class Branch(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class Fixed:
    id: str
    x: float
    y: float


@dataclass(frozen=True)
class Crank:
    id: str
    anchor: str
    radius: float
    initial_angle: float = 0.0


@dataclass(frozen=True)
class Revolute:
    id: str
    parent0: str
    parent1: str
    dist0: float
    dist1: float
    branch: Branch = Branch.POSITIVE


Joint = Union[Fixed, Crank, Revolute]


def parents_of(joint: Joint) -> tuple[str, ...]:
    if isinstance(joint, Crank):
        return (joint.anchor,)
    if isinstance(joint, Revolute):
        return (joint.parent0, joint.parent1)
    return ()


@dataclass(frozen=True)
class Diagnostic:
    """One structured simulator or validation message (``sim_msg``)."""

    code: str
    message: str
    joint: str | None = None
    step: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "joint": self.joint, "step": self.step}

    def __str__(self) -> str:
        where = f" [joint {self.joint}" + (f", step {self.step}]" if self.step is not None else "]") if self.joint else ""
        return f"{self.code}{where}: {self.message}"


@dataclass(frozen=True)
class Linkage:
    name: str
    joints: tuple[Joint, ...]
    target: str
    intent: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "joints", tuple(self.joints))

    @property
    def ids(self) -> list[str]:
        return [j.id for j in self.joints]

    def joint(self, joint_id: str) -> Joint:
        for j in self.joints:
            if j.id == joint_id:
                return j
        raise KeyError(joint_id)

    def replace_joint(self, new: Joint) -> "Linkage":
        joints = tuple(new if j.id == new.id else j for j in self.joints)
        return replace(self, joints=joints)

    def to_dict(self) -> dict[str, Any]:
        return linkage_to_dict(self)

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(linkage_to_dict(self), indent=indent)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered planar samples. ``dt`` is the step between samples."""

    samples: np.ndarray
    dt: float = 1.0

    def __post_init__(self) -> None:
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"trajectory samples must have shape (N, 2), got {arr.shape}")
        if arr.shape[0] < 2:
            raise ValueError("trajectory needs at least 2 samples")
        if not np.all(np.isfinite(arr)):
            raise ValueError("trajectory has non-finite coordinates")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.dt == other.dt and np.array_equal(self.samples, other.samples)

    __hash__ = None  # type: ignore[assignment]

    @property
    def x(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.samples[:, 1]

    def is_closed(self, tol: float = 1e-6) -> bool:
        return bool(np.linalg.norm(self.samples[0] - self.samples[-1]) < tol)


@dataclass(frozen=True)
class SimulationResult:
    per_joint: Mapping[str, Trajectory]
    buildable: bool
    diagnostics: tuple[Diagnostic, ...]
    dof: int
    target: str | None = None
    n_links: int = 0
    n_joints: int = 0

    @property
    def effector(self) -> Trajectory | None:
        if not self.buildable or self.target is None:
            return None
        return self.per_joint.get(self.target)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate(linkage: Linkage) -> list[Diagnostic]:
    """Check every joint and linkage invariant; an empty list means valid."""
    diags: list[Diagnostic] = []
    seen: dict[str, int] = {}
    for idx, j in enumerate(linkage.joints):
        if not isinstance(j.id, str) or not j.id:
            diags.append(Diagnostic("bad-id", f"joint #{idx} has an empty id"))
            continue
        if j.id in seen:
            diags.append(Diagnostic("duplicate-id", f"id {j.id!r} declared twice", j.id))
            continue
        for p in parents_of(j):
            if p == j.id:
                diags.append(Diagnostic("self-reference", f"{j.id} references itself", j.id))
            elif p not in linkage.ids:
                diags.append(Diagnostic("unknown-reference", f"{j.id} references undeclared joint {p!r}", j.id))
            elif p not in seen:
                diags.append(Diagnostic("order", f"{j.id} references {p!r} which is declared after it", j.id))
        if isinstance(j, Fixed):
            if not (math.isfinite(j.x) and math.isfinite(j.y)):
                diags.append(Diagnostic("non-finite", f"{j.id} has non-finite coordinates", j.id))
        elif isinstance(j, Crank):
            if not (math.isfinite(j.radius) and j.radius > 0):
                diags.append(Diagnostic("non-positive-length", f"crank {j.id} radius must be > 0", j.id))
            if not math.isfinite(j.initial_angle):
                diags.append(Diagnostic("non-finite", f"crank {j.id} has a non-finite initial angle", j.id))
            anchor = next((k for k in linkage.joints if k.id == j.anchor), None)
            if anchor is not None and not isinstance(anchor, Fixed):
                diags.append(Diagnostic("crank-anchor", f"crank {j.id} must be anchored on a fixed joint", j.id))
        elif isinstance(j, Revolute):
            if j.parent0 == j.parent1:
                diags.append(Diagnostic("duplicate-parent", f"{j.id} uses {j.parent0!r} as both parents", j.id))
            for name, d in (("dist0", j.dist0), ("dist1", j.dist1)):
                if not (math.isfinite(d) and d > 0):
                    diags.append(Diagnostic("non-positive-length", f"{j.id}.{name} must be > 0", j.id))
        else:
            diags.append(Diagnostic("bad-kind", f"joint #{idx} has an unknown kind", getattr(j, "id", None)))
        seen[j.id] = idx

    cranks = [j.id for j in linkage.joints if isinstance(j, Crank)]
    if len(cranks) != 1:
        diags.append(Diagnostic("crank-count", f"expected exactly one crank, found {len(cranks)}"))
    if linkage.target not in seen:
        diags.append(Diagnostic("unknown-target", f"target {linkage.target!r} is not a declared joint", linkage.target))

    if linkage.joints and not any(d.code in ("duplicate-id", "bad-id") for d in diags):
        comp = _component(linkage, linkage.joints[0].id)
        for j in linkage.joints:
            if j.id not in comp:
                diags.append(Diagnostic("disconnected", f"{j.id} is not connected to {linkage.joints[0].id}", j.id))
    elif not linkage.joints:
        diags.append(Diagnostic("empty", "linkage has no joints"))
    return diags


def _component(linkage: Linkage, start: str) -> set[str]:
    adj: dict[str, set[str]] = {j.id: set() for j in linkage.joints}
    for j in linkage.joints:
        for p in parents_of(j):
            if p in adj:
                adj[j.id].add(p)
                adj[p].add(j.id)
    comp: set[str] = set()
    stack = [start]
    while stack:
        n = stack.pop()
        if n in comp:
            continue
        comp.add(n)
        stack.extend(adj[n] - comp)
    return comp


def require_valid(linkage: Linkage) -> None:
    diags = validate(linkage)
    if diags:
        raise LinkageError(f"invalid linkage {linkage.name!r}: " + "; ".join(map(str, diags)), diags)


# ---------------------------------------------------------------------------
# mobility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Structure:
    """Rigid links and pin joints extracted from the joint graph."""

    links: tuple[frozenset[str], ...]
    pins: tuple[str, ...]

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def n_joints(self) -> int:
        return len(self.pins)


def structure(linkage: Linkage) -> Structure:
    """Group distance constraints into rigid links and locate the pins.

    The ground link holds every fixed joint. A crank adds one binary link. A
    revolute whose parents already share a link is a point on that link;
    otherwise it adds two binary links. A pin is a joint shared by two or
    more links, counted once however many links meet there.
    """
    ground = frozenset(j.id for j in linkage.joints if isinstance(j, Fixed))
    bodies: list[set[str]] = [set(ground)]
    for j in linkage.joints:
        if isinstance(j, Crank):
            bodies.append({j.anchor, j.id})
        elif isinstance(j, Revolute):
            shared = next((b for b in bodies if j.parent0 in b and j.parent1 in b), None)
            if shared is not None:
                shared.add(j.id)
            else:
                bodies.append({j.parent0, j.id})
                bodies.append({j.parent1, j.id})
    links = tuple(frozenset(b) for b in bodies)
    pins = tuple(j.id for j in linkage.joints if sum(j.id in b for b in links) >= 2)
    return Structure(links, pins)


def gruebler(n_links: int, n_joints: int) -> int:
    """Planar mobility F = 3(n - 1) - 2j for lower-pair joints."""
    return 3 * (n_links - 1) - 2 * n_joints


def dof(linkage: Linkage) -> int:
    require_valid(linkage)
    s = structure(linkage)
    return gruebler(s.n_links, s.n_joints)


# ---------------------------------------------------------------------------
# kinematics
# ---------------------------------------------------------------------------

def _circle_solve(x0, y0, r0, x1, y1, r1, rel_tol: float = 1e-9):
    """Vectorised two-circle intersection.

    Returns ``(bx, by, ox, oy, feasible)`` such that the solutions are
    ``(bx + ox, by + oy)`` (positive branch) and ``(bx - ox, by - oy)``.
    """
    x0, y0, r0, x1, y1, r1 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x0, y0, r0, x1, y1, r1)))
    dx = x1 - x0
    dy = y1 - y0
    d = np.hypot(dx, dy)
    tol = rel_tol * np.maximum(r0, r1)
    feasible = (d > tol) & (d <= r0 + r1 + tol) & (d >= np.abs(r0 - r1) - tol)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        safe_d = np.where(d > 0, d, 1.0)
        ux = dx / safe_d
        uy = dy / safe_d
        a = (r0 * r0 - r1 * r1 + d * d) / (2.0 * safe_d)
        h2 = r0 * r0 - a * a
    tangent = (np.abs(d - (r0 + r1)) <= tol) | (np.abs(d - np.abs(r0 - r1)) <= tol)
    h = np.where(tangent | (h2 < 0), 0.0, np.sqrt(np.maximum(h2, 0.0)))
    bx = x0 + a * ux
    by = y0 + a * uy
    # perp(u) = (-uy, ux) has positive cross product with u
    return bx, by, -uy * h, ux * h, feasible


def circle_intersection(c0, r0: float, c1, r1: float) -> list[tuple[float, float]]:
    """All intersection points of two circles, positive branch first.

    The positive branch is the point whose cross product
    ``(c1 - c0) x (p - c0)`` is positive. Tangent circles (within
    ``1e-9 * max(r0, r1)``) give one point, disjoint or nested circles none.
    """
    if not (r0 > 0 and r1 > 0):
        raise ValueError("radii must be positive")
    bx, by, ox, oy, ok = _circle_solve(c0[0], c0[1], r0, c1[0], c1[1], r1)
    if not bool(ok):
        return []
    bx, by, ox, oy = float(bx), float(by), float(ox), float(oy)
    if ox == 0.0 and oy == 0.0:
        return [(bx, by)]
    return [(bx + ox, by + oy), (bx - ox, by - oy)]


def crank_phases(n_steps: int) -> np.ndarray:
    """``n_steps`` uniform phases in [0, 2pi) plus the closing phase 2pi."""
    return 2.0 * np.pi * np.arange(n_steps + 1) / n_steps


def simulate(linkage: Linkage, n_steps: int = DEFAULT_STEPS) -> SimulationResult:
    """Solve every joint over one crank revolution.

    Trajectories have ``n_steps + 1`` samples; the last one is solved at phase
    2pi so closure can be checked rather than assumed.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    require_valid(linkage)
    s = structure(linkage)
    mobility = gruebler(s.n_links, s.n_joints)
    phases = crank_phases(n_steps)
    m = phases.size
    pos: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for j in linkage.joints:
        if isinstance(j, Fixed):
            pos[j.id] = (np.full(m, float(j.x)), np.full(m, float(j.y)))
        elif isinstance(j, Crank):
            ax, ay = pos[j.anchor]
            theta = j.initial_angle + phases
            pos[j.id] = (ax + j.radius * np.cos(theta), ay + j.radius * np.sin(theta))
        else:
            x0, y0 = pos[j.parent0]
            x1, y1 = pos[j.parent1]
            bx, by, ox, oy, ok = _circle_solve(x0, y0, j.dist0, x1, y1, j.dist1)
            if not np.all(ok):
                step = int(np.argmin(ok))
                gap = math.hypot(x1[step] - x0[step], y1[step] - y0[step])
                diag = Diagnostic(
                    "infeasible-joint",
                    f"distance between {j.parent0} and {j.parent1} is {gap:.6g}, outside "
                    f"[|{j.dist0:.6g} - {j.dist1:.6g}|, {j.dist0:.6g} + {j.dist1:.6g}]; "
                    "circles do not intersect",
                    j.id,
                    step,
                )
                return SimulationResult({}, False, (diag,), mobility, linkage.target, s.n_links, s.n_joints)
            sign = 1.0 if j.branch is Branch.POSITIVE else -1.0
            pos[j.id] = (bx + sign * ox, by + sign * oy)
    dt = 1.0 / n_steps
    per_joint = {jid: Trajectory(np.column_stack(xy), dt) for jid, xy in pos.items()}
    return SimulationResult(per_joint, True, (), mobility, linkage.target, s.n_links, s.n_joints)


def semantic_success(parse_ok: bool, result: SimulationResult | None) -> bool:
    """A candidate counts only if it parsed and simulated without error."""
    return bool(parse_ok and result is not None and result.buildable)


# ---------------------------------------------------------------------------
# JSON contract
# ---------------------------------------------------------------------------

def joint_to_dict(j: Joint) -> dict[str, Any]:
    if isinstance(j, Fixed):
        return {"id": j.id, "kind": "fixed", "x": j.x, "y": j.y}
    if isinstance(j, Crank):
        return {"id": j.id, "kind": "crank", "anchor": j.anchor, "radius": j.radius, "initial_angle": j.initial_angle}
    return {
        "id": j.id,
        "kind": "revolute",
        "parent0": j.parent0,
        "parent1": j.parent1,
        "dist0": j.dist0,
        "dist1": j.dist1,
        "branch": j.branch.value,
    }


def linkage_to_dict(linkage: Linkage) -> dict[str, Any]:
    out: dict[str, Any] = {"name": linkage.name, "target": linkage.target}
    if linkage.intent:
        out["intent"] = linkage.intent
    out["joints"] = [joint_to_dict(j) for j in linkage.joints]
    return out


def _num(d: Mapping[str, Any], key: str, where: str) -> float:
    if key not in d:
        raise LinkageParseError(f"{where}: missing field {key!r}")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise LinkageParseError(f"{where}: field {key!r} must be a number")
    return float(v)


def _str(d: Mapping[str, Any], key: str, where: str) -> str:
    v = d.get(key)
    if not isinstance(v, str):
        raise LinkageParseError(f"{where}: field {key!r} must be a string")
    return v


def joint_from_dict(d: Mapping[str, Any]) -> Joint:
    if not isinstance(d, Mapping):
        raise LinkageParseError("joint entries must be objects")
    jid = _str(d, "id", "joint")
    where = f"joint {jid!r}"
    kind = d.get("kind")
    if kind == "fixed":
        return Fixed(jid, _num(d, "x", where), _num(d, "y", where))
    if kind == "crank":
        angle = _num(d, "initial_angle", where) if "initial_angle" in d else 0.0
        return Crank(jid, _str(d, "anchor", where), _num(d, "radius", where), angle)
    if kind == "revolute":
        raw = d.get("branch", "positive")
        try:
            branch = Branch(raw)
        except ValueError:
            raise LinkageParseError(f"{where}: branch must be 'positive' or 'negative', got {raw!r}") from None
        return Revolute(
            jid,
            _str(d, "parent0", where),
            _str(d, "parent1", where),
            _num(d, "dist0", where),
            _num(d, "dist1", where),
            branch,
        )
    raise LinkageParseError(f"{where}: unknown kind {kind!r}")


def linkage_from_dict(d: Mapping[str, Any]) -> Linkage:
    if not isinstance(d, Mapping):
        raise LinkageParseError("linkage document must be a JSON object")
    joints = d.get("joints")
    if not isinstance(joints, list) or not joints:
        raise LinkageParseError("field 'joints' must be a non-empty list")
    intent = d.get("intent", "")
    return Linkage(
        name=_str(d, "name", "linkage"),
        joints=tuple(joint_from_dict(j) for j in joints),
        target=_str(d, "target", "linkage"),
        intent=intent if isinstance(intent, str) else "",
    )


_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.S)


def extract_json(text: str) -> Any:
    """Pull the first JSON object out of free text (fenced or bare)."""
    candidates = [m.group(1) for m in _FENCE.finditer(text)]
    candidates.append(text)
    decoder = json.JSONDecoder()
    for chunk in candidates:
        start = chunk.find("{")
        while start != -1:
            try:
                obj, _ = decoder.raw_decode(chunk[start:])
                return obj
            except json.JSONDecodeError:
                start = chunk.find("{", start + 1)
    raise LinkageParseError("no JSON object found in text")


def parse_linkage(text: str) -> Linkage:
    return linkage_from_dict(extract_json(text))


def load_linkage(path) -> Linkage:
    with open(path, encoding="utf-8") as fh:
        return linkage_from_dict(json.load(fh))


def canned_linkages() -> dict[str, Linkage]:
    """Reference topologies used by tests, the CLI and the scripted agents."""
    fourbar = Linkage(
        "four-bar",
        (
            Fixed("A", 0.0, 0.0),
            Fixed("D", 3.0, 0.0),
            Crank("B", "A", 1.0, 0.0),
            Revolute("C", "B", "D", 3.0, 2.5, Branch.POSITIVE),
            Revolute("E", "B", "C", 1.5, 2.0, Branch.POSITIVE),
        ),
        target="E",
        intent="trace a closed coupler curve",
    )
    # dyad hung off the existing pin C: six links meet at six pin locations
    redundant = Linkage(
        "six-link-six-joint",
        fourbar.joints[:4]
        + (
            Fixed("H", 6.0, 0.0),
            Revolute("G", "C", "H", 3.0, 3.0, Branch.POSITIVE),
        ),
        target="G",
        intent="trace an ellipse",
    )
    corrected = Linkage(
        "six-link-seven-joint",
        fourbar.joints
        + (
            Fixed("H", 6.0, 0.0),
            Revolute("G", "E", "H", 4.0, 4.0, Branch.POSITIVE),
        ),
        target="G",
        intent="trace an ellipse",
    )
    return {l.name: l for l in (fourbar, redundant, corrected)}


def iter_bars(linkage: Linkage) -> Iterable[tuple[str, str]]:
    """Distance constraints as joint-id pairs (crank arms and revolute arms)."""
    for j in linkage.joints:
        if isinstance(j, Crank):
            yield (j.anchor, j.id)
        elif isinstance(j, Revolute):
            yield (j.parent0, j.id)
            yield (j.parent1, j.id)
