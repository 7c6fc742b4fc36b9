"""Event alphabet and detection on a sampled trace."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from ..linkage import Trajectory
from .config import LiftingConfig
from .geometry import Guard, Region, self_intersections
from .proxies import KinematicProxies, QualSignature, signature


class EventKind(str, Enum):
    INF = "INF"
    EX_X = "EX_x"
    EX_Y = "EX_y"
    SINT = "SINT"
    REGION_IN = "RegionIn"
    REGION_OUT = "RegionOut"
    REGION_CROSS = "RegionCross"
    GUARD_CROSS = "GuardCross"


_ORDER = {k: n for n, k in enumerate(EventKind)}


@dataclass(frozen=True)
class Event:
    kind: EventKind
    t: float
    index: int
    payload: str | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "t": self.t, "index": self.index, "payload": self.payload}

    def __str__(self) -> str:
        tail = f"[{self.payload}]" if self.payload else ""
        return f"{self.kind.value}{tail}@{self.t:.3f}"


def is_closed(traj: Trajectory) -> bool:
    return traj.is_closed(1e-9 * (1.0 + float(np.ptp(traj.samples))))


def sign_flips(tokens: np.ndarray, closed: bool) -> list[int]:
    """Indices where a hysteretic sign switches between +1 and -1.

    On a closed trace a switch between the last and first samples is reported
    at index 0.
    """
    out = [i for i in range(1, tokens.shape[0]) if tokens[i] != tokens[i - 1] and tokens[i] != 0 and tokens[i - 1] != 0]
    if closed and tokens.shape[0] > 1 and tokens[0] != 0 and tokens[-1] != 0 and tokens[0] != tokens[-1]:
        out.insert(0, 0)
    return out


def retained_intersections(hits: Sequence, config: LiftingConfig) -> list:
    """Keep every ``stride``-th intersection from a seeded offset."""
    if not hits:
        return []
    stride = config.sint_stride
    rng = np.random.default_rng(config.seed)
    offset = int(rng.integers(min(stride, len(hits))))
    return list(hits[offset::stride])


def detect_events(
    traj: Trajectory,
    px: KinematicProxies,
    regions: Iterable[Region] = (),
    guards: Iterable[Guard] = (),
    config: LiftingConfig = LiftingConfig(),
    sig: QualSignature | None = None,
) -> list[Event]:
    pts = traj.samples
    n = pts.shape[0] - 1
    closed = is_closed(traj)
    sig = sig if sig is not None else signature(px, config)

    def ev(kind, i, payload=None):
        return Event(kind, i / n, int(i), payload)

    events: list[Event] = []
    events += [ev(EventKind.INF, i) for i in sign_flips(sig.s_kappa, closed)]
    events += [ev(EventKind.EX_X, i) for i in sign_flips(sig.m_x, closed)]
    events += [ev(EventKind.EX_Y, i) for i in sign_flips(sig.m_y, closed)]

    hits = self_intersections(traj, closed)
    events += [ev(EventKind.SINT, i) for i, _, _ in retained_intersections(hits, config)]

    for region in regions:
        inside = region.contains(pts)
        if inside[0]:
            events.append(ev(EventKind.REGION_IN, 0, region.id))
        crosses = region.segment_hits(pts[:-1], pts[1:])
        for i in range(1, n + 1):
            if inside[i] and not inside[i - 1]:
                events.append(ev(EventKind.REGION_IN, i, region.id))
            elif inside[i - 1] and not inside[i]:
                events.append(ev(EventKind.REGION_OUT, i, region.id))
            elif not inside[i] and not inside[i - 1] and crosses[i - 1]:
                events.append(ev(EventKind.REGION_CROSS, i, region.id))

    for guard in guards:
        side = guard.signed_distance(pts) >= 0
        normal_speed = np.abs(px.velocities @ guard.normal)
        last = None
        for i in range(1, n + 1):
            if side[i] == side[i - 1]:
                continue
            if normal_speed[i] < config.guard_min_normal_speed:
                continue
            if last is not None and i - last < config.guard_min_separation:
                continue
            events.append(ev(EventKind.GUARD_CROSS, i, guard.id))
            last = i

    events.sort(key=lambda e: (e.t, _ORDER[e.kind], e.payload or ""))
    return events


def kind_counts(events: Iterable[Event]) -> dict[str, int]:
    out: dict[str, int] = {}
    for e in events:
        key = e.kind.value if e.payload is None else f"{e.kind.value}[{e.payload}]"
        out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items()))
