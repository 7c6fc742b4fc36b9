from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from ..linkage import Diagnostic, SimulationResult, Trajectory
from ..metrics import RigidTransform2D
from .config import LiftingConfig
from .events import Event, detect_events, kind_counts
from .geometry import Guard, Region, default_guards, default_region
from .proxies import QualSignature, proxies as compute_proxies, signature
from .segmental import Segment, SegmentSummary, segment_dr
from .sketch import FeaturePrimitive, compose_sketch
from .spec import synthesize_spec
from .temporal import Formula, build_context, formula_to_dict, satisfaction, to_text


@dataclass(frozen=True)
class Structural:
    """Mirror of the simulator's structural report."""

    dof: int
    n_links: int
    n_joints: int
    buildable: bool
    diagnostics: tuple[Diagnostic, ...] = ()

    @classmethod
    def from_sim(cls, sim: SimulationResult) -> "Structural":
        return cls(sim.dof, sim.n_links, sim.n_joints, sim.buildable, tuple(sim.diagnostics))

    def to_dict(self) -> dict:
        return {
            "dof": self.dof,
            "n_links": self.n_links,
            "n_joints": self.n_joints,
            "buildable": self.buildable,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


@dataclass(frozen=True)
class Tokens:
    signature: Optional[QualSignature]
    segments: tuple[Segment, ...] = ()
    summary: Optional[SegmentSummary] = None


@dataclass(frozen=True)
class RepresentationBundle:
    structural: Structural
    tokens: Tokens = field(default_factory=lambda: Tokens(None))
    sketches: tuple[FeaturePrimitive, ...] = ()
    events: tuple[Event, ...] = ()
    spec: Optional[Formula] = None
    spec_satisfied: Optional[bool] = None
    regions: tuple[Region, ...] = ()
    guards: tuple[Guard, ...] = ()

    @property
    def has_trajectory(self) -> bool:
        return self.tokens.signature is not None or bool(self.tokens.segments) or bool(self.sketches)

    def to_text(self) -> str:
        s = self.structural
        lines = [
            f"STRUCTURE dof={s.dof} links={s.n_links} joints={s.n_joints} buildable={'yes' if s.buildable else 'no'}"
        ]
        lines += [f"DIAG {d}" for d in s.diagnostics]
        if self.tokens.segments:
            lines.append("TOKENS " + " ".join(f"{g.label.value}x{g.length}" for g in self.tokens.segments))
            summ = self.tokens.summary
            if summ is not None:
                freq = ", ".join(f"{k}={v:.2f}" for k, v in summ.label_frequency.items())
                lines.append(
                    f"SEGMENTS n={summ.n_segments} mean_run={summ.mean_run_length:.2f} entropy={summ.entropy:.3f} freq[{freq}]"
                )
        for p in self.sketches:
            lines.append(f"SKETCH {p}")
        if self.events:
            lines.append("EVENTS " + ", ".join(f"{k}:{v}" for k, v in kind_counts(self.events).items()))
        if self.spec is not None:
            lines.append(f"SPEC {to_text(self.spec)}")
            if self.spec_satisfied is not None:
                lines.append(f"SPEC_SATISFIED {'yes' if self.spec_satisfied else 'no'}")
        elif not s.buildable:
            lines.append("SPEC absent (mechanism unbuildable)")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        sig = self.tokens.signature
        return {
            "structural": self.structural.to_dict(),
            "tokens": {
                "signature": None
                if sig is None
                else {"s_kappa": sig.s_kappa.tolist(), "m_x": sig.m_x.tolist(), "m_y": sig.m_y.tolist()},
                "segments": [
                    {
                        "label": g.label.value,
                        "start": g.start,
                        "end": g.end,
                        "dominant_heading": g.heading_name,
                        "dominant_curvature_sign": g.dominant_curvature_sign,
                    }
                    for g in self.tokens.segments
                ],
                "summary": None if self.tokens.summary is None else self.tokens.summary.to_dict(),
            },
            "sketches": [p.to_dict() for p in self.sketches],
            "events": [e.to_dict() for e in self.events],
            "spec": None if self.spec is None else {"text": to_text(self.spec), "tree": formula_to_dict(self.spec)},
            "spec_satisfied": self.spec_satisfied,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def lift(
    sim: SimulationResult,
    target: Trajectory,
    config: LiftingConfig = LiftingConfig(),
    transform: RigidTransform2D | None = None,
) -> RepresentationBundle:
    """Lift the effector trace of ``sim`` against ``target``.

    Regions and guards come from the target, and the effector trace is mapped
    into the target frame by ``transform`` when one is given. Without a
    buildable trace only the structural part is filled in.
    """
    structural = Structural.from_sim(sim)
    if not sim.buildable or not (config.dr or config.cl):
        return RepresentationBundle(structural)
    pts = sim.effector.samples
    if transform is not None:
        pts = transform.apply(pts)
    trace = Trajectory(pts, sim.effector.dt)

    tokens = Tokens(None)
    if config.dr:
        segments, summary = segment_dr(trace, config)
        tokens = Tokens(None, tuple(segments), summary)
    if not config.cl:
        return RepresentationBundle(structural, tokens)

    regions = (default_region(target, config.region_pad),)
    guards = default_guards(target)
    px = compute_proxies(trace, config.dt, config.singular_speed)
    sig = signature(px, config)
    events = detect_events(trace, px, regions, guards, config, sig)
    sketch = compose_sketch(px, events, sig)
    spec = synthesize_spec(target, regions, guards, config)
    ctx = build_context(trace, events, regions, guards, config, px.curvatures)
    satisfied = bool(satisfaction(spec, ctx)[0])
    return RepresentationBundle(
        structural,
        Tokens(sig, tokens.segments, tokens.summary),
        tuple(sketch),
        tuple(events),
        spec,
        satisfied,
        regions,
        guards,
    )
