import json
from dataclasses import replace

import numpy as np
import pytest

from linksym.lifting import (
    F,
    G,
    In,
    LiftingConfig,
    MotionLabel,
    Region,
    default_guards,
    default_region,
    detect_events,
    evaluate,
    has_containment,
    lift,
    proxies,
    synthesize_spec,
    to_text,
)
from linksym.lifting.spec import containment_windows, merge_intervals
from linksym.lifting.temporal import And
from linksym.linkage import SimulationResult, Trajectory, canned_linkages, simulate
from linksym.targets import ShapeKind, make_target

CFG = LiftingConfig()


def as_sim(trace):
    return SimulationResult({"T": trace}, True, (), 1, "T", 4, 4)


def conjuncts(f):
    return f.args if isinstance(f, And) else (f,)


def self_check(target):
    regions = [default_region(target, CFG.region_pad)]
    guards = default_guards(target)
    spec = synthesize_spec(target, regions, guards, CFG)
    events = detect_events(target, proxies(target), regions, guards, CFG)
    return evaluate(spec, target, events, regions, guards, CFG)


class TestSynthesis:
    @pytest.mark.parametrize("kind", list(ShapeKind))
    def test_containment_always_first(self, kind):
        spec = synthesize_spec(make_target(kind))
        assert has_containment(spec)
        assert to_text(spec).startswith("G_[0.00,1.00](in(R_in))")

    @pytest.mark.parametrize("kind", list(ShapeKind))
    def test_target_meets_its_own_spec(self, kind):
        assert self_check(make_target(kind))

    def test_ellipse_shape(self):
        text = to_text(synthesize_spec(make_target("ellipse")))
        assert text.startswith("G_[0.00,1.00](in(R_in)) ∧ F_[0.00,1.00](INF | EX_x | EX_y) ∧ ")
        assert "(¬cross(L_0) U_[0.00,1.00] in(R_in))" in text

    def test_event_windows_are_half_sample_padded(self):
        t = make_target("lemniscate", 100)
        windows = [(c.a, c.b) for c in conjuncts(synthesize_spec(t)) if isinstance(c, F) and c.b - c.a < 1]
        assert len(windows) >= 4
        inner = [w for w in windows if 0 < w[0] and w[1] < 1]
        assert all(b - a == pytest.approx(0.01) for a, b in inner)

    def test_line_has_no_event_windows(self):
        spec = synthesize_spec(make_target("line"))
        assert not [c for c in conjuncts(spec) if isinstance(c, F)]

    def test_extra_region_windows(self):
        t = make_target("line", 11)
        half = Region("R_half", -1, -1, 5.0, 11)
        spec = synthesize_spec(t, [half])
        gs = [c for c in conjuncts(spec) if isinstance(c, G) and c.arg == In("R_half")]
        assert [(g.a, g.b) for g in gs] == [(0.0, pytest.approx(0.55))]
        assert containment_windows(t, half) == [(0.0, pytest.approx(0.55))]

    def test_too_short(self):
        with pytest.raises(ValueError):
            synthesize_spec(Trajectory(np.zeros((2, 2))))


def test_merge_intervals():
    assert merge_intervals([(0.5, 0.6), (0.0, 0.2), (0.1, 0.3)]) == [(0.0, 0.3), (0.5, 0.6)]
    assert merge_intervals([(0.0, 0.2), (0.2 + 5e-13, 0.4)]) == [(0.0, 0.4)]
    assert merge_intervals([(0.0, 0.2), (0.2 + 1e-9, 0.4)]) == [(0.0, 0.2), (0.2 + 1e-9, 0.4)]
    assert merge_intervals([]) == []


class TestLift:
    def test_unbuildable_is_structural_only(self):
        fb = canned_linkages()["four-bar"]
        c = fb.joint("C")
        broken = fb.replace_joint(replace(c, dist0=0.1, dist1=0.1))
        sim = simulate(broken, 50)
        assert not sim.buildable
        b = lift(sim, make_target("ellipse"))
        assert b.spec is None and not b.has_trajectory
        text = b.to_text()
        assert "SPEC absent" in text and "DIAG" in text
        assert b.structural.diagnostics

    def test_both_toggles_off(self):
        sim = simulate(canned_linkages()["four-bar"], 50)
        b = lift(sim, make_target("ellipse"), LiftingConfig(dr=False, cl=False))
        assert not b.has_trajectory and b.spec is None
        assert b.structural.dof == 1 and b.structural.buildable

    def test_dr_only(self):
        sim = simulate(canned_linkages()["four-bar"], 50)
        b = lift(sim, make_target("ellipse"), LiftingConfig(cl=False))
        assert b.tokens.segments and b.tokens.signature is None
        assert not b.sketches and not b.events and b.spec is None

    def test_cl_only(self):
        sim = simulate(canned_linkages()["four-bar"], 50)
        b = lift(sim, make_target("ellipse"), LiftingConfig(dr=False))
        assert not b.tokens.segments and b.tokens.signature is not None
        assert b.sketches and b.spec is not None

    def test_circle_tracer(self):
        fb = replace(canned_linkages()["four-bar"], target="B")
        sim = simulate(fb, 100)
        target = make_target("circle")
        # place the crank circle onto the target
        pts = sim.effector.samples * 5.0 + 5.0
        b = lift(as_sim(Trajectory(pts)), target)
        assert len(b.sketches) == 1
        assert {s.label for s in b.tokens.segments} == {MotionLabel.GENTLE_TURN}
        assert has_containment(b.spec) and b.spec_satisfied

    def test_structure_mirrors_sim(self):
        sim = simulate(canned_linkages()["six-link-seven-joint"], 50)
        s = lift(sim, make_target("ellipse")).structural
        assert (s.dof, s.n_links, s.n_joints, s.buildable) == (sim.dof, sim.n_links, sim.n_joints, sim.buildable)

    def test_deterministic(self):
        sim = simulate(canned_linkages()["four-bar"], 100)
        t = make_target("lemniscate")
        assert lift(sim, t).to_json() == lift(sim, t).to_json()

    def test_json_keys(self):
        sim = simulate(canned_linkages()["four-bar"], 50)
        d = json.loads(lift(sim, make_target("ellipse")).to_json())
        assert set(d) == {"structural", "tokens", "sketches", "events", "spec", "spec_satisfied"}
        assert d["spec"]["text"].startswith("G_[0.00,1.00]")
