"""Symbolic lifting of traces into tokens, sketches, events and temporal specs."""
from .bundle import RepresentationBundle, Structural, Tokens, lift
from .config import LiftingConfig
from .events import Event, EventKind, detect_events, kind_counts
from .geometry import Guard, Region, default_guards, default_region, self_intersections
from .proxies import KinematicProxies, QualSignature, hysteretic_sign, proxies, signature
from .robustness import stability_margin
from .segmental import MotionLabel, Segment, SegmentSummary, segment_dr
from .sketch import FeaturePrimitive, compose_sketch
from .spec import has_containment, synthesize_spec
from .temporal import (
    And,
    Cross,
    CurvZero,
    EventAtom,
    F,
    Formula,
    G,
    In,
    Not,
    Or,
    U,
    evaluate,
    parse_formula,
    to_text,
)

__all__ = [
    "And",
    "Cross",
    "CurvZero",
    "Event",
    "EventAtom",
    "EventKind",
    "F",
    "FeaturePrimitive",
    "Formula",
    "G",
    "Guard",
    "In",
    "KinematicProxies",
    "LiftingConfig",
    "MotionLabel",
    "Not",
    "Or",
    "QualSignature",
    "Region",
    "RepresentationBundle",
    "Segment",
    "SegmentSummary",
    "Structural",
    "Tokens",
    "U",
    "compose_sketch",
    "default_guards",
    "default_region",
    "detect_events",
    "evaluate",
    "has_containment",
    "hysteretic_sign",
    "kind_counts",
    "lift",
    "parse_formula",
    "proxies",
    "segment_dr",
    "self_intersections",
    "signature",
    "stability_margin",
    "synthesize_spec",
    "to_text",
]
