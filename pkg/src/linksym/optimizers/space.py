"""Bounded continuous parameters bound to linkage fields."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from ..linkage import Crank, Fixed, Linkage, Revolute

FIELDS = {
    Fixed: ("x", "y"),
    Crank: ("radius", "initial_angle"),
    Revolute: ("dist0", "dist1"),
}
LENGTH_FIELDS = ("radius", "dist0", "dist1")


@dataclass(frozen=True)
class ParamSpec:
    id: str
    lower: float
    upper: float

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)) or not self.lower < self.upper:
            raise ValueError(f"{self.id}: need finite lower < upper, got [{self.lower}, {self.upper}]")
        joint, _, fld = self.id.partition(".")
        if not joint or not fld:
            raise ValueError(f"parameter id {self.id!r} is not of the form joint.field")

    @property
    def joint(self) -> str:
        return self.id.partition(".")[0]

    @property
    def field(self) -> str:
        return self.id.partition(".")[2]


@dataclass(frozen=True)
class ParamSpace:
    specs: tuple[ParamSpec, ...]

    def __post_init__(self):
        if not self.specs:
            raise ValueError("empty parameter space")
        ids = [s.id for s in self.specs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate parameter ids")

    def __len__(self) -> int:
        return len(self.specs)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.specs]

    @property
    def lower(self) -> np.ndarray:
        return np.array([s.lower for s in self.specs])

    @property
    def upper(self) -> np.ndarray:
        return np.array([s.upper for s in self.specs])

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, values, tol: float = 1e-12) -> bool:
        v = np.asarray(values, dtype=float)
        return v.shape == (len(self),) and bool(np.all(v >= self.lower - tol) and np.all(v <= self.upper + tol))

    def check(self, linkage: Linkage) -> None:
        """Every id must name exactly one tunable field of ``linkage``."""
        for s in self.specs:
            try:
                j = linkage.joint(s.joint)
            except KeyError:
                raise ValueError(f"parameter {s.id}: no joint {s.joint!r}") from None
            if s.field not in FIELDS[type(j)]:
                raise ValueError(f"parameter {s.id}: {type(j).__name__} has no tunable field {s.field!r}")

    def instantiate(self, linkage: Linkage, values) -> Linkage:
        v = np.asarray(values, dtype=float)
        if not self.contains(v):
            raise ValueError(f"parameters out of bounds: {v.tolist()}")
        self.check(linkage)
        out = linkage
        for s, x in zip(self.specs, v):
            j = out.joint(s.joint)
            out = out.replace_joint(replace(j, **{s.field: float(x)}))
        return out

    def values_of(self, linkage: Linkage) -> np.ndarray:
        self.check(linkage)
        return np.array([float(getattr(linkage.joint(s.joint), s.field)) for s in self.specs])

    def to_dict(self) -> list[dict]:
        return [{"id": s.id, "lower": s.lower, "upper": s.upper} for s in self.specs]


def _length_bounds(v: float, spread: float) -> tuple[float, float]:
    return max(1e-3, v * (1.0 - spread)), v * (1.0 + spread)


def default_space(linkage: Linkage, spread: float = 0.5, ids: Sequence[str] | None = None) -> ParamSpace:
    """Lengths around their current values.

    Without ``ids`` the free set is the crank radius plus both arm lengths of
    the effector joint (or of the last revolute when the effector is fixed).
    """
    if ids is None:
        ids = []
        for j in linkage.joints:
            if isinstance(j, Crank):
                ids.append(f"{j.id}.radius")
        eff = linkage.joint(linkage.target)
        if not isinstance(eff, Revolute):
            revs = [j for j in linkage.joints if isinstance(j, Revolute)]
            eff = revs[-1] if revs else None
        if eff is not None:
            ids += [f"{eff.id}.dist0", f"{eff.id}.dist1"]
    specs = []
    for pid in ids:
        joint, _, fld = pid.partition(".")
        v = float(getattr(linkage.joint(joint), fld))
        if fld in LENGTH_FIELDS:
            lo, hi = _length_bounds(v, spread)
        elif fld == "initial_angle":
            lo, hi = v - np.pi, v + np.pi
        else:
            lo, hi = v - 2.0, v + 2.0
        specs.append(ParamSpec(pid, lo, hi))
    return ParamSpace(tuple(specs))


def length_space(linkage: Linkage, spread: float = 0.5) -> ParamSpace:
    """Every crank radius and revolute arm length is free."""
    ids: list[str] = []
    for j in linkage.joints:
        if isinstance(j, Crank):
            ids.append(f"{j.id}.radius")
        elif isinstance(j, Revolute):
            ids += [f"{j.id}.dist0", f"{j.id}.dist1"]
    return default_space(linkage, spread, ids)


def space_from_ids(linkage: Linkage, ids: Iterable[str], spread: float = 0.5) -> ParamSpace:
    return default_space(linkage, spread, list(ids))
