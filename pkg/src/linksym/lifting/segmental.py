"""Discrete segmental representation: motion labels collapsed into runs."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..linkage import Trajectory
from .config import LiftingConfig
from .proxies import wrap_pi

OCTANTS = ("E", "NE", "N", "NW", "W", "SW", "S", "SE")


class MotionLabel(str, Enum):
    PAUSE = "Pause"
    STRAIGHT = "Straight"
    GENTLE_TURN = "GentleTurn"
    SHARP_TURN = "SharpTurn"
    U_TURN = "UTurn"


@dataclass(frozen=True)
class Segment:
    label: MotionLabel
    start: int
    end: int
    dominant_heading: int
    dominant_curvature_sign: int

    @property
    def length(self) -> int:
        return self.end - self.start

    @property
    def heading_name(self) -> str:
        return OCTANTS[self.dominant_heading] if self.dominant_heading < len(OCTANTS) else str(self.dominant_heading)


@dataclass(frozen=True)
class SegmentSummary:
    label_frequency: dict[str, float]
    mean_run_length: float
    transition_counts: dict[str, int]
    entropy: float
    n_segments: int = 0

    def to_dict(self) -> dict:
        return {
            "label_frequency": self.label_frequency,
            "mean_run_length": self.mean_run_length,
            "transition_counts": self.transition_counts,
            "entropy": self.entropy,
            "n_segments": self.n_segments,
        }


@dataclass(frozen=True, eq=False)
class StepKinematics:
    """Forward-difference steps v_i = p_{i+1} - p_i and the turn at each sample."""

    speeds: np.ndarray
    headings: np.ndarray
    turns: np.ndarray  # signed heading change arriving at each sample, radians


def step_kinematics(traj: Trajectory) -> StepKinematics:
    pts = traj.samples
    v = np.diff(pts, axis=0)
    s = np.hypot(v[:, 0], v[:, 1])
    th = np.arctan2(v[:, 1], v[:, 0])
    n = pts.shape[0]
    speeds = np.empty(n)
    speeds[:-1] = s
    speeds[-1] = s[-1]
    headings = np.empty(n)
    headings[:-1] = th
    headings[-1] = th[-1]
    turns = np.zeros(n)
    # turn at vertex i is between step i-1 and step i
    turns[1:-1] = wrap_pi(th[1:] - th[:-1])
    scale = 1.0 + float(np.ptp(pts))
    if n > 3 and traj.is_closed(1e-9 * scale):
        turns[0] = turns[-1] = wrap_pi(th[0] - th[-1])
    return StepKinematics(speeds, headings, turns)


def quantize_heading(theta, bins: int = 8) -> np.ndarray:
    width = 2.0 * np.pi / bins
    return (np.floor((np.mod(theta, 2.0 * np.pi) + width / 2.0) / width).astype(int)) % bins


def classify(speeds: np.ndarray, turns: np.ndarray, config: LiftingConfig = LiftingConfig()) -> list[MotionLabel]:
    c = np.degrees(np.abs(turns))
    labels = []
    for s, ci in zip(speeds, c):
        if s < config.pause_speed:
            labels.append(MotionLabel.PAUSE)
        elif ci <= config.straight_deg:
            labels.append(MotionLabel.STRAIGHT)
        elif ci <= config.gentle_deg:
            labels.append(MotionLabel.GENTLE_TURN)
        elif ci <= config.sharp_deg:
            labels.append(MotionLabel.SHARP_TURN)
        else:
            labels.append(MotionLabel.U_TURN)
    return labels


def _mode(values) -> int:
    counts = Counter(int(v) for v in values)
    best = max(counts.values())
    for v in values:
        if counts[int(v)] == best:
            return int(v)
    raise ValueError("empty run")


def segment_dr(traj: Trajectory, config: LiftingConfig = LiftingConfig()) -> tuple[list[Segment], SegmentSummary]:
    """Label every sample, then collapse runs of equal labels into segments."""
    if len(traj) < 3:
        raise ValueError("segmentation needs at least 3 samples")
    k = step_kinematics(traj)
    # a turn measured against a paused step carries no direction
    turns = k.turns.copy()
    paused = k.speeds < config.pause_speed
    turns[1:][paused[:-1]] = 0.0
    labels = classify(k.speeds, turns, config)
    bins = quantize_heading(k.headings, config.heading_bins)
    straight = math.radians(config.straight_deg)
    curv_sign = np.where(turns > straight, 1, np.where(turns < -straight, -1, 0))

    segments: list[Segment] = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            segments.append(
                Segment(labels[start], start, i, _mode(bins[start:i]), _mode(curv_sign[start:i]))
            )
            start = i

    n = len(labels)
    freq = Counter(l.value for l in labels)
    label_frequency = {l.value: freq[l.value] / n for l in MotionLabel if freq[l.value]}
    transitions = Counter(f"{a.label.value}->{b.label.value}" for a, b in zip(segments, segments[1:]))
    entropy = -sum(p * math.log2(p) for p in label_frequency.values())
    summary = SegmentSummary(
        label_frequency,
        n / len(segments),
        dict(sorted(transitions.items())),
        entropy + 0.0,
        len(segments),
    )
    return segments, summary


def sample_labels(traj: Trajectory, config: LiftingConfig = LiftingConfig()) -> list[MotionLabel]:
    segments, _ = segment_dr(traj, config)
    out: list[MotionLabel] = []
    for s in segments:
        out.extend([s.label] * s.length)
    return out
