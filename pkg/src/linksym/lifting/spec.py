"""Synthesis of a bounded temporal specification from a target curve."""
from __future__ import annotations

from typing import Sequence


from ..linkage import Trajectory
from .config import LiftingConfig
from .events import EventKind, detect_events
from .geometry import Guard, Region, default_guards, default_region
from .proxies import proxies as compute_proxies
from .temporal import F, G, U, And, Cross, EventAtom, Formula, In, Not, Or, conjunction

SHAPE_EVENTS = (EventKind.INF, EventKind.EX_X, EventKind.EX_Y)


def merge_intervals(intervals: Sequence[tuple[float, float]], tol: float = 1e-12) -> list[tuple[float, float]]:
    """Union of closed intervals; neighbours closer than ``tol`` are joined."""
    out: list[list[float]] = []
    for a, b in sorted(intervals):
        if out and a - out[-1][1] <= tol:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def _clip(a: float, b: float) -> tuple[float, float]:
    return max(0.0, a), min(1.0, b)


def containment_windows(target: Trajectory, region: Region, config: LiftingConfig = LiftingConfig()) -> list[tuple[float, float]]:
    """Padded time windows where the target stays inside ``region``."""
    inside = region.contains(target.samples)
    n = len(target) - 1
    h = 0.5 / n
    spans = []
    start = None
    for i, flag in enumerate(list(inside) + [False]):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            a = 0.0 if start == 0 else start / n - h
            b = 1.0 if i - 1 == n else (i - 1) / n + h
            spans.append(_clip(a, b))
            start = None
    return merge_intervals(spans, config.merge_tol)


def shape_event_disjunction() -> Formula:
    return Or(tuple(EventAtom(k.value) for k in SHAPE_EVENTS))


def synthesize_spec(
    target: Trajectory,
    regions: Sequence[Region] | None = None,
    guards: Sequence[Guard] | None = None,
    config: LiftingConfig = LiftingConfig(),
) -> Formula:
    """Conjunction of containment, event and ordering requirements.

    The containment region ``R_in`` (padded bounding box of the target) is
    always the first region, so the result always starts with
    ``G_[0.00,1.00](in(R_in))``.
    """
    if len(target) < 3:
        raise ValueError("target needs at least 3 samples")
    r_in = default_region(target, config.region_pad)
    regions = [r_in] + [r for r in (regions or ()) if r.id != r_in.id]
    guards = list(default_guards(target) if guards is None else guards)
    n = len(target) - 1
    h = 0.5 / n

    parts: list[Formula] = []
    for region in regions:
        for a, b in containment_windows(target, region, config):
            parts.append(G(a, b, In(region.id)))

    px = compute_proxies(target, config.dt, config.singular_speed)
    events = detect_events(target, px, regions, guards, config)
    shape = [e for e in events if e.kind in SHAPE_EVENTS]
    if shape:
        parts.append(F(0.0, 1.0, shape_event_disjunction()))
    for guard in guards:
        parts.append(U(0.0, 1.0, Not(Cross(guard.id)), In(r_in.id)))
    windows = merge_intervals([_clip(e.t - h, e.t + h) for e in shape], config.merge_tol)
    for a, b in windows:
        parts.append(F(a, b, shape_event_disjunction()))
    return conjunction(parts)


def has_containment(formula: Formula, region_id: str = "R_in") -> bool:
    """Whether ``G_[0,1](in(region_id))`` is a top-level conjunct."""
    items = formula.args if isinstance(formula, And) else (formula,)
    return any(isinstance(x, G) and x.a == 0.0 and x.b == 1.0 and x.arg == In(region_id) for x in items)
