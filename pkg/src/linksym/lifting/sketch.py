from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .events import Event
from .proxies import KinematicProxies, QualSignature


@dataclass(frozen=True)
class FeaturePrimitive:
    """Interval descriptor: curvature sign, monotonicity pair, arc length, events.

    ``start``/``end`` are sample indices of the half-open interval. Equality of
    ``qualitative()`` tuples is what the robustness guarantee is about; the
    arc length moves continuously with the samples.
    """

    curv: int
    mono: tuple[int, int]
    length: float
    events: frozenset[str]
    start: int
    end: int

    def qualitative(self) -> tuple:
        return (self.curv, self.mono, tuple(sorted(self.events)), self.start, self.end)

    def to_dict(self) -> dict:
        return {
            "curv": self.curv,
            "mono": list(self.mono),
            "len": self.length,
            "ev": sorted(self.events),
            "start": self.start,
            "end": self.end,
        }

    def __str__(self) -> str:
        ev = ",".join(sorted(self.events)) or "-"
        return f"<curv={self.curv:+d}, mono=({self.mono[0]:+d},{self.mono[1]:+d}), len={self.length:.4g}, ev={{{ev}}}>"


def _majority(tokens: np.ndarray) -> int:
    pos = int(np.count_nonzero(tokens > 0))
    neg = int(np.count_nonzero(tokens < 0))
    if pos > neg:
        return 1
    if neg > pos:
        return -1
    if pos == 0:
        return 0
    return int(tokens[np.flatnonzero(tokens)[0]])


def runs(values: Sequence[int]) -> list[tuple[int, int]]:
    """Maximal runs of equal values as half-open index intervals."""
    out = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] != values[start]:
            out.append((start, i))
            start = i
    return out


def compose_sketch(px: KinematicProxies, events: Iterable[Event], sig: QualSignature) -> list[FeaturePrimitive]:
    """Split the trace at curvature-sign changes and describe each piece."""
    n = len(sig)
    events = list(events)
    seg_len = px.speeds * px.dt
    out = []
    for start, end in runs(sig.s_kappa.tolist()):
        inside = frozenset(e.kind.value for e in events if start <= e.index < end)
        out.append(
            FeaturePrimitive(
                int(sig.s_kappa[start]),
                (_majority(sig.m_x[start:end]), _majority(sig.m_y[start:end])),
                math.fsum(seg_len[start:end].tolist()),
                inside,
                start,
                end,
            )
        )
    assert out[-1].end == n
    return out
