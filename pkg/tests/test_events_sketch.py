import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linksym.lifting import (
    EventKind,
    Guard,
    LiftingConfig,
    Region,
    compose_sketch,
    default_guards,
    default_region,
    detect_events,
    kind_counts,
    proxies,
    self_intersections,
    signature,
)
from linksym.lifting.events import retained_intersections
from linksym.linkage import Trajectory
from linksym.targets import make_target
from oracles import all_pairs_crossings, random_smooth_trace

CFG = LiftingConfig()


def events_of(t, regions=(), guards=(), cfg=CFG):
    return detect_events(t, proxies(t), regions, guards, cfg)


def kinds(evts):
    return [e.kind for e in evts]


def s_curve(n=50):
    a = np.linspace(-np.pi / 2, 0, n)
    arc1 = np.column_stack((np.cos(a), 1 + np.sin(a)))
    b = np.linspace(np.pi, np.pi / 2, n)[1:]
    arc2 = np.column_stack((2 + np.cos(b), 1 + np.sin(b)))
    return Trajectory(np.vstack((arc1, arc2)))


class TestEvents:
    def test_circle(self):
        ev = events_of(make_target("circle"))
        c = kind_counts(ev)
        assert c.get("INF", 0) == 0
        assert c["EX_x"] == 2 and c["EX_y"] == 2

    def test_lemniscate(self):
        t = make_target("lemniscate", 100)
        ev = events_of(t)
        full = all_pairs_crossings([tuple(p) for p in t.samples], closed=True)
        assert len(full) >= 1
        sint = [e for e in ev if e.kind is EventKind.SINT]
        assert 1 <= len(sint) <= len(full)
        assert {e.index for e in sint} <= {i for i, _, _ in full}
        assert kind_counts(ev)["INF"] >= 2

    def test_self_intersections_match_oracle(self):
        for seed in range(8):
            pts = random_smooth_trace(np.random.default_rng(seed), 80, closed=bool(seed % 2))
            got = self_intersections(Trajectory(pts))
            want = all_pairs_crossings([tuple(p) for p in pts], closed=bool(seed % 2))
            assert [(i, j) for i, j, _ in got] == [(i, j) for i, j, _ in want]
            for (_, _, p), (_, _, q) in zip(got, want):
                assert np.allclose(p, q, atol=1e-9)

    def test_inside_region(self):
        t = make_target("ellipse")
        r = default_region(t)
        ev = events_of(t, [r])
        region_ev = [e for e in ev if e.payload == r.id]
        assert [(e.kind, e.t) for e in region_ev] == [(EventKind.REGION_IN, 0.0)]

    def test_region_transitions(self):
        pts = np.column_stack((np.linspace(0, 10, 11), np.zeros(11)))
        r = Region("R", 2.5, -1, 6.5, 1)
        ev = [e for e in events_of(Trajectory(pts), [r]) if e.payload == "R"]
        assert [(e.kind, e.index) for e in ev] == [(EventKind.REGION_IN, 3), (EventKind.REGION_OUT, 7)]

    def test_region_cross_between_samples(self):
        pts = np.column_stack((np.linspace(0, 10, 6), np.zeros(6)))
        r = Region("R", 2.5, -1, 3.5, 1)
        ev = [e for e in events_of(Trajectory(pts), [r]) if e.payload == "R"]
        assert [(e.kind, e.index) for e in ev] == [(EventKind.REGION_CROSS, 2)]

    def test_guard_separation(self):
        # y flips sign every 2 samples; accepted crossings must be >= 5 apart
        y = np.array([1.0, 1.0, -1.0, -1.0] * 8)
        pts = np.column_stack((np.arange(y.size, dtype=float), y))
        g = Guard("L", (0.0, 0.0), (1.0, 0.0))
        idx = [e.index for e in events_of(Trajectory(pts), guards=[g]) if e.kind is EventKind.GUARD_CROSS]
        assert idx and all(b - a >= 5 for a, b in zip(idx, idx[1:]))
        flips = [i for i in range(1, y.size) if (y[i] >= 0) != (y[i - 1] >= 0)]
        assert idx[0] == flips[0]

    def test_guard_needs_normal_speed(self):
        pts = np.column_stack((np.arange(10.0), np.linspace(-2e-5, 2e-5, 10)))
        g = Guard("L", (0.0, 0.0), (1.0, 0.0))
        assert not [e for e in events_of(Trajectory(pts), guards=[g]) if e.kind is EventKind.GUARD_CROSS]

    def test_sorted_and_normalized(self):
        t = make_target("lemniscate")
        ev = events_of(t, [default_region(t)], default_guards(t))
        ts = [e.t for e in ev]
        assert ts == sorted(ts) and all(0 <= x <= 1 for x in ts)
        n = len(t) - 1
        assert all(e.t == e.index / n for e in ev)

    def test_retention_rule(self):
        hits = list(range(37))
        for seed in range(20):
            kept = retained_intersections(hits, LiftingConfig(seed=seed))
            assert len(kept) in (3, 4)
            assert all(b - a == 10 for a, b in zip(kept, kept[1:]))
            assert 0 <= kept[0] < 10
        assert retained_intersections([5, 6], LiftingConfig(seed=3)) in ([5], [6])
        assert retained_intersections([], CFG) == []

    def test_deterministic_with_seed(self):
        t = make_target("lemniscate", 200)
        assert events_of(t) == events_of(t)


class TestSketch:
    def test_circle_single_primitive(self):
        t = make_target("circle")
        px = proxies(t)
        sig = signature(px)
        prims = compose_sketch(px, events_of(t), sig)
        assert len(prims) == 1
        assert prims[0].curv in (1, -1)
        assert {"EX_x", "EX_y"} <= prims[0].events
        assert prims[0].length == pytest.approx(np.sum(px.speeds))

    def test_s_curve_two_primitives(self):
        t = s_curve()
        px = proxies(t)
        sig = signature(px)
        ev = events_of(t)
        prims = compose_sketch(px, ev, sig)
        assert [p.curv for p in prims] == [1, -1]
        (inf,) = [e for e in ev if e.kind is EventKind.INF]
        assert prims[0].end == inf.index == prims[1].start
        assert "INF" in prims[1].events
        assert all(p.mono == (1, 1) for p in prims)

    def test_partition(self):
        t = make_target("lemniscate")
        px = proxies(t)
        prims = compose_sketch(px, events_of(t), signature(px))
        assert prims[0].start == 0 and prims[-1].end == len(t)
        assert all(a.end == b.start and a.curv != b.curv for a, b in zip(prims, prims[1:]))
        assert math.fsum(p.length for p in prims) == pytest.approx(float(np.sum(px.speeds)))

    def test_text_and_dict(self):
        t = make_target("circle")
        px = proxies(t)
        (p,) = compose_sketch(px, events_of(t), signature(px))
        assert str(p).startswith("<curv=+1, mono=(")
        assert set(p.to_dict()) == {"curv", "mono", "len", "ev", "start", "end"}

    @given(st.integers(0, 5000), st.booleans())
    def test_events_belong_to_one_primitive(self, seed, closed):
        t = Trajectory(random_smooth_trace(np.random.default_rng(seed), 60, closed))
        px = proxies(t)
        ev = events_of(t)
        prims = compose_sketch(px, ev, signature(px))
        for e in ev:
            owners = [p for p in prims if p.start <= e.index < p.end]
            assert len(owners) == 1 and e.kind.value in owners[0].events
