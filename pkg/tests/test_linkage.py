import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from linksym.linkage import (
    Branch,
    Crank,
    Fixed,
    Linkage,
    LinkageError,
    LinkageParseError,
    Revolute,
    canned_linkages,
    circle_intersection,
    dof,
    gruebler,
    iter_bars,
    linkage_from_dict,
    parse_linkage,
    semantic_success,
    simulate,
    structure,
    validate,
)
from oracles import four_bar_oracle


def four_bar(r=1.0, c=(3.0, 2.5), e=(1.5, 2.0), ground=3.0, theta0=0.0):
    return Linkage(
        "fb",
        (
            Fixed("A", 0.0, 0.0),
            Fixed("D", ground, 0.0),
            Crank("B", "A", r, theta0),
            Revolute("C", "B", "D", c[0], c[1]),
            Revolute("E", "B", "C", e[0], e[1]),
        ),
        target="E",
    )


def codes(diags):
    return {d.code for d in diags}


class TestValidate:
    def test_four_bar_is_valid(self):
        assert validate(canned_linkages()["four-bar"]) == []

    def test_duplicate_parent(self):
        lk = four_bar().replace_joint(Revolute("C", "B", "B", 1.0, 1.0))
        diags = validate(lk)
        assert "duplicate-parent" in codes(diags)
        assert any(d.joint == "C" for d in diags)

    def test_unknown_reference(self):
        lk = four_bar().replace_joint(Revolute("C", "B", "Z", 1.0, 1.0))
        diags = validate(lk)
        assert "unknown-reference" in codes(diags)
        assert "Z" in str(diags[0])

    def test_parent_declared_late(self):
        fb = four_bar()
        lk = Linkage("late", (fb.joints[0], fb.joints[2], fb.joints[3], fb.joints[1], fb.joints[4]), "E")
        assert "order" in codes(validate(lk))

    def test_two_cranks_rejected(self):
        fb = four_bar()
        lk = Linkage("two", fb.joints + (Crank("K", "D", 0.5),), "E")
        assert "crank-count" in codes(validate(lk))

    def test_non_positive_lengths(self):
        lk = four_bar().replace_joint(Revolute("E", "B", "C", 0.0, 1.0))
        assert "non-positive-length" in codes(validate(lk))

    def test_unknown_target(self):
        fb = four_bar()
        assert "unknown-target" in codes(validate(Linkage("t", fb.joints, "Q")))

    def test_disconnected(self):
        fb = four_bar()
        lk = Linkage("iso", fb.joints + (Fixed("Z", 9.0, 9.0),), "E")
        assert "disconnected" in codes(validate(lk))

    def test_crank_on_moving_joint(self):
        fb = four_bar()
        lk = Linkage("c", fb.joints[:2] + (Revolute("X", "A", "D", 2.0, 2.0), Crank("B", "X", 1.0)), "B")
        assert "crank-anchor" in codes(validate(lk))


class TestMobility:
    def test_canned_counts(self):
        c = canned_linkages()
        assert dof(c["four-bar"]) == 1
        assert dof(c["six-link-six-joint"]) == 3
        assert dof(c["six-link-seven-joint"]) == 1

    def test_link_and_joint_counts(self):
        c = canned_linkages()
        s = structure(c["six-link-six-joint"])
        assert (s.n_links, s.n_joints) == (6, 6)
        s = structure(c["six-link-seven-joint"])
        assert (s.n_links, s.n_joints) == (6, 7)
        s = structure(c["four-bar"])
        assert (s.n_links, s.n_joints) == (4, 4)

    def test_formula(self):
        assert gruebler(6, 6) == 3
        assert gruebler(6, 7) == 1
        assert gruebler(4, 4) == 1
        assert gruebler(5, 5) == 2

    def test_coupler_point_adds_no_link(self):
        fb = four_bar()
        s = structure(fb)
        assert frozenset({"B", "C", "E"}) in s.links

    def test_dof_of_invalid_raises(self):
        with pytest.raises(LinkageError):
            dof(four_bar().replace_joint(Revolute("C", "B", "B", 1.0, 1.0)))


class TestCircleIntersection:
    def test_tangent(self):
        (p,) = circle_intersection((0, 0), 1.0, (2, 0), 1.0)
        assert p == pytest.approx((1.0, 0.0))

    def test_symmetric_pair_positive_first(self):
        pts = circle_intersection((0, 0), math.sqrt(2), (2, 0), math.sqrt(2))
        assert len(pts) == 2
        assert pts[0] == pytest.approx((1.0, 1.0))
        assert pts[1] == pytest.approx((1.0, -1.0))

    def test_disjoint(self):
        assert circle_intersection((0, 0), 1.0, (5, 0), 1.0) == []

    def test_nested(self):
        assert circle_intersection((0, 0), 5.0, (1, 0), 1.0) == []

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            circle_intersection((0, 0), 0.0, (1, 0), 1.0)

    @given(
        st.floats(-5, 5),
        st.floats(-5, 5),
        st.floats(0.1, 5),
        st.floats(-5, 5),
        st.floats(-5, 5),
        st.floats(0.1, 5),
    )
    def test_points_lie_on_both_circles(self, x0, y0, r0, x1, y1, r1):
        pts = circle_intersection((x0, y0), r0, (x1, y1), r1)
        for px, py in pts:
            assert abs(math.hypot(px - x0, py - y0) - r0) < 1e-9 * max(1.0, r0, r1) * 10
            assert abs(math.hypot(px - x1, py - y1) - r1) < 1e-9 * max(1.0, r0, r1) * 10
        if len(pts) == 2:
            cross = (x1 - x0) * (pts[0][1] - y0) - (y1 - y0) * (pts[0][0] - x0)
            assert cross > 0


class TestSimulate:
    def test_unit_crank_samples(self):
        lk = Linkage("c", (Fixed("A", 0, 0), Crank("B", "A", 1.0, 0.0)), "B")
        got = simulate(lk, 4).per_joint["B"].samples
        want = np.array([[1, 0], [0, 1], [-1, 0], [0, -1], [1, 0]], dtype=float)
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_matches_geometric_oracle(self):
        lk = four_bar()
        sim = simulate(lk, 100)
        assert sim.buildable and sim.dof == 1
        rows = four_bar_oracle((0, 0), (3, 0), 1.0, 0.0, (3.0, 2.5), (1.5, 2.0), 100)
        for k, (b, c, e) in enumerate(rows):
            for jid, want in (("B", b), ("C", c), ("E", e)):
                np.testing.assert_allclose(sim.per_joint[jid].samples[k], want, atol=1e-9)

    def test_closure(self):
        sim = simulate(four_bar(), 100)
        for tr in sim.per_joint.values():
            assert np.linalg.norm(tr.samples[0] - tr.samples[-1]) < 1e-6

    def test_unbuildable_names_joint(self):
        lk = four_bar().replace_joint(Revolute("C", "B", "D", 0.5, 0.5))
        sim = simulate(lk, 50)
        assert not sim.buildable
        assert sim.diagnostics and sim.diagnostics[0].joint == "C"
        assert "circles do not intersect" in str(sim.diagnostics[0])

    def test_invalid_raises(self):
        with pytest.raises(LinkageError):
            simulate(four_bar().replace_joint(Revolute("C", "B", "Z", 1, 1)))

    def test_deterministic(self):
        a, b = simulate(four_bar(), 80), simulate(four_bar(), 80)
        for k in a.per_joint:
            assert np.array_equal(a.per_joint[k].samples, b.per_joint[k].samples)

    def test_sample_count_and_dt(self):
        sim = simulate(four_bar(), 40)
        assert len(sim.effector) == 41
        assert sim.effector.dt == pytest.approx(1 / 40)

    def test_negative_branch_mirrors(self):
        fb = four_bar()
        neg = fb.replace_joint(Revolute("C", "B", "D", 3.0, 2.5, Branch.NEGATIVE))
        pc = simulate(fb, 20).per_joint["C"].samples
        nc = simulate(neg, 20).per_joint["C"].samples
        assert not np.allclose(pc, nc)

    @given(
        st.floats(0.3, 1.0),
        st.floats(2.5, 4.0),
        st.floats(2.0, 4.0),
        st.floats(0.5, 3.0),
        st.floats(0.5, 3.0),
        st.floats(-math.pi, math.pi),
    )
    def test_closure_and_branch_stability(self, r, c0, c1, e0, e1, th):
        lk = four_bar(r=r, c=(c0, c1), e=(e0, e1), theta0=th)
        sim = simulate(lk, 120)
        assume(sim.buildable)
        for tr in sim.per_joint.values():
            assert np.linalg.norm(tr.samples[0] - tr.samples[-1]) < 1e-6
        for j in lk.joints:
            if isinstance(j, Revolute):
                p0 = sim.per_joint[j.parent0].samples
                p1 = sim.per_joint[j.parent1].samples
                q = sim.per_joint[j.id].samples
                cross = (p1[:, 0] - p0[:, 0]) * (q[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (q[:, 0] - p0[:, 0])
                assert np.all(cross >= -1e-9)


class TestSemanticSuccess:
    def test_cases(self):
        good = simulate(four_bar(), 10)
        bad = simulate(four_bar().replace_joint(Revolute("C", "B", "D", 0.5, 0.5)), 10)
        assert semantic_success(True, good)
        assert not semantic_success(False, good)
        assert not semantic_success(True, bad)
        assert not semantic_success(True, None)


class TestJsonContract:
    def test_round_trip(self):
        for lk in canned_linkages().values():
            assert linkage_from_dict(lk.to_dict()) == lk
            assert parse_linkage(lk.to_json()) == lk

    def test_fenced_reply(self):
        lk = canned_linkages()["four-bar"]
        text = f"Here is my design.\n```json\n{lk.to_json(indent=2)}\n```\nDone."
        assert parse_linkage(text) == lk

    def test_schema_field_names(self):
        d = canned_linkages()["four-bar"].to_dict()
        assert set(d) >= {"name", "target", "joints"}
        kinds = {j["kind"] for j in d["joints"]}
        assert kinds == {"fixed", "crank", "revolute"}

    @pytest.mark.parametrize(
        "doc",
        [
            {"name": "x", "target": "A", "joints": []},
            {"name": "x", "target": "A", "joints": [{"id": "A", "kind": "slider"}]},
            {"name": "x", "target": "A", "joints": [{"id": "A", "kind": "fixed", "x": "1", "y": 0}]},
            {"name": "x", "target": "A", "joints": [{"id": "A", "kind": "revolute", "parent0": "B", "parent1": "C",
                                                     "dist0": 1, "dist1": 1, "branch": "up"}]},
        ],
    )
    def test_malformed(self, doc):
        with pytest.raises(LinkageParseError):
            linkage_from_dict(doc)

    def test_no_json(self):
        with pytest.raises(LinkageParseError):
            parse_linkage("no braces here")


def test_iter_bars_four_bar():
    assert sorted(iter_bars(four_bar())) == [("A", "B"), ("B", "C"), ("B", "E"), ("C", "E"), ("D", "C")]
