import json

import httpx
import pytest

from linksym.agents import (
    DEFAULT_TABLE,
    BackendError,
    Backends,
    Candidate,
    ExemplarMemory,
    FailureMode,
    FailureModeTable,
    LoopConfig,
    OptimizerSpec,
    PlanParseError,
    RemoteBackend,
    Rule,
    ScriptedBackend,
    TopologyError,
    best_of,
    parse_plan,
    refinement_loop,
    scripted_backend,
    topology_agent,
    write_history,
)
from linksym.agents.backends import role_of
from linksym.agents.planning import Action, parse_mode
from linksym.agents.roles import load_prompt
from linksym.linkage import canned_linkages, dof, simulate
from linksym.targets import make_target


def ok_payload(text):
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


def remote(handler, **kw):
    return RemoteBackend(url="http://test/v1/chat", model="m", transport=httpx.MockTransport(handler), sleep=lambda s: None, **kw)


class TestRemote:
    def test_success_and_payload(self):
        seen = {}

        def handler(req):
            seen.update(json.loads(req.content))
            seen["auth"] = req.headers.get("authorization")
            return httpx.Response(200, json=ok_payload("hello"))

        b = remote(handler, api_key="k", temperature=0.3)
        assert b.complete("ROLE: critic", "ctx") == "hello"
        assert seen["model"] == "m" and seen["temperature"] == 0.3 and seen["auth"] == "Bearer k"
        assert [m["role"] for m in seen["messages"]] == ["system", "user"]

    def test_client_error_is_not_retried(self):
        calls = []

        def handler(req):
            calls.append(1)
            return httpx.Response(401, text="nope")

        with pytest.raises(BackendError, match="401"):
            remote(handler).complete("p", "c")
        assert len(calls) == 1

    def test_server_error_retried_then_ok(self):
        codes = iter([503, 500, 200])
        waits = []

        def handler(req):
            c = next(codes)
            return httpx.Response(c, json=ok_payload("fine")) if c == 200 else httpx.Response(c)

        b = RemoteBackend(url="http://x", transport=httpx.MockTransport(handler), sleep=waits.append, backoff=0.5)
        assert b.complete("p", "c") == "fine"
        assert waits == [0.5, 1.0]

    def test_retries_exhausted(self):
        with pytest.raises(BackendError, match="giving up"):
            remote(lambda req: httpx.Response(502), max_retries=2).complete("p", "c")

    def test_malformed_payload(self):
        with pytest.raises(BackendError, match="malformed"):
            remote(lambda req: httpx.Response(200, json={"nothing": 1})).complete("p", "c")

    def test_env_configuration(self, monkeypatch):
        monkeypatch.delenv("LINKSYM_API_URL", raising=False)
        with pytest.raises(BackendError):
            RemoteBackend()
        monkeypatch.setenv("LINKSYM_API_URL", "http://env")
        monkeypatch.setenv("LINKSYM_MODEL", "env-model")
        assert RemoteBackend().name == "remote:env-model"


class TestScripted:
    def test_first_matching_rule(self):
        b = ScriptedBackend([Rule("critic", "foo", "A"), Rule("critic", ".", "B"), Rule("*", ".", "C")])
        assert b.complete("ROLE: critic", "has foo") == "A"
        assert b.complete("ROLE: critic", "bar") == "B"
        assert b.complete("ROLE: planner", "bar") == "C"

    def test_cycling_and_callables(self):
        b = ScriptedBackend([Rule("x", ".", ["1", "2"]), Rule("y", r"n=(\d+)", lambda t, m: m.group(1))])
        assert [b.complete("ROLE: x", "") for _ in range(3)] == ["1", "2", "1"]
        assert b.complete("ROLE: y", "n=42") == "42"

    def test_no_rule(self):
        with pytest.raises(BackendError):
            ScriptedBackend().complete("ROLE: critic", "")

    def test_prompts_declare_roles(self):
        for role in ("topology", "critic", "planner", "refiner"):
            assert role_of(load_prompt(role)) == role


class TestPlanning:
    def test_table(self):
        assert DEFAULT_TABLE.resolve(FailureMode.OVERCONSTRAINT) == "remove a redundant link"
        assert DEFAULT_TABLE.resolve(FailureMode.UNDERCONSTRAINT) == "add a loop"
        with pytest.raises(ValueError):
            FailureModeTable({FailureMode.OVERCONSTRAINT: Action("x", ("x",))})

    def test_parse_json_reply(self):
        p = parse_plan('Sure.\n{"failure_mode": "Overconstraint", "structural_cause": "loop", "suggested_action": "remove link D"}')
        assert p.failure_mode is FailureMode.OVERCONSTRAINT and p.in_family
        assert p.canonical_action == "remove a redundant link"

    def test_parse_field_lines(self):
        p = parse_plan("**Failure Mode:** Effective Underconstraint\nStructural Cause: x\nSuggested Action: swap pivots")
        assert p.failure_mode is FailureMode.UNDERCONSTRAINT and not p.in_family

    @pytest.mark.parametrize("text", ['{"failure_mode": "banana"}', "Failure Mode: <mode>", "nothing here"])
    def test_strict(self, text):
        with pytest.raises(PlanParseError):
            parse_plan(text)

    def test_mode_aliases(self):
        assert parse_mode("kinematic inaccuracy") is FailureMode.KINEMATIC_INACCURACY
        assert parse_mode("None") is FailureMode.NONE


class TestRoles:
    def test_topology_retries_until_buildable(self):
        bad = canned_linkages()["four-bar"].to_json().replace('"dist0": 3.0', '"dist0": 0.1')
        b = ScriptedBackend([Rule("topology", ".", ["not json", bad, canned_linkages()["four-bar"].to_json()])])
        prop = topology_agent("x", make_target("line"), ExemplarMemory(), b)
        assert [a.semantic_success for a in prop.attempts] == [False, False, True]
        assert [a.parsed for a in prop.attempts] == [False, True, True]

    def test_topology_gives_up(self):
        b = ScriptedBackend([Rule("topology", ".", "garbage")])
        with pytest.raises(TopologyError) as e:
            topology_agent("x", make_target("line"), ExemplarMemory(), b, candidates=2)
        assert len(e.value.attempts) == 2

    def test_memory_bounded_and_ranked(self):
        m = ExemplarMemory(maxlen=2)
        lk = canned_linkages()["four-bar"]
        for s in (3.0, 1.0, 2.0):
            m.add("i", lk, s)
        assert len(m) == 2
        text = m.render()
        assert text.index("score: 1.0") < text.index("score: 2.0")


def ellipse_run(rounds=3):
    return refinement_loop(
        "trace an ellipse",
        make_target("ellipse"),
        LoopConfig(max_rounds=rounds),
        Backends.single(scripted_backend()),
        OptimizerSpec("none"),
    )[0]


class TestLoop:
    def test_ellipse_overconstraint_fixture(self):
        ep = ellipse_run()
        first, second = ep.records[0], ep.records[1]
        assert first.dof == 3 and dof(canned_linkages()["six-link-six-joint"]) == 3
        assert second.plan["failure_mode"] == "Overconstraint"
        assert second.plan["canonical_action"] == "remove a redundant link"
        assert second.dof == 1 and second.buildable

    def test_incumbent_non_increasing(self):
        vals = ellipse_run(4).incumbent_values
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    def test_history_jsonl(self, tmp_path):
        ep = ellipse_run(2)
        write_history([ep], tmp_path / "h.jsonl")
        rows = [json.loads(l) for l in (tmp_path / "h.jsonl").read_text().splitlines()]
        assert [r["round"] for r in rows] == [0, 1, 2]
        assert {"bundle", "report", "plan", "incumbent", "accepted"} <= set(rows[1])

    def test_backend_failure_aborts(self):
        b = ScriptedBackend([Rule("topology", ".", canned_linkages()["four-bar"].to_json())])
        ep = refinement_loop("x", make_target("line"), LoopConfig(max_rounds=3), Backends.single(b), OptimizerSpec("none"))[0]
        assert ep.aborted and ep.incumbent is not None and len(ep.records) == 2

    def test_planner_off(self):
        ep = refinement_loop(
            "trace an ellipse",
            make_target("ellipse"),
            LoopConfig(max_rounds=1, planner=False),
            Backends.single(scripted_backend()),
            OptimizerSpec("none"),
        )[0]
        assert ep.records[1].plan is None and ep.records[1].dof == 1

    def test_best_of(self):
        assert best_of([]) is None
        ep = ellipse_run(1)
        assert best_of([ep]) is ep


class ScriptedValues:
    """Optimizer stand-in that returns a fixed sequence of scores."""

    def __init__(self, values):
        self.values = list(values)
        self.calls = 0
        self.sim = simulate(canned_linkages()["four-bar"], 60)

    def __call__(self, linkage, target, seed=0):
        v = self.values[min(self.calls, len(self.values) - 1)]
        self.calls += 1
        return Candidate(linkage, v, self.sim, None)


def four_bar_backends():
    return Backends.single(scripted_backend())


class TestTermination:
    def test_stops_at_epsilon(self):
        opt = ScriptedValues([0.5, 0.3, 0.6, 0.004, 0.001])
        ep = refinement_loop("x", make_target("line"), LoopConfig(), four_bar_backends(), opt)[0]
        assert ep.converged and ep.rounds == 3
        assert ep.incumbent_values == [0.5, 0.3, 0.3, 0.004]

    def test_caps_at_max_rounds(self):
        opt = ScriptedValues([0.5] + [0.9] * 20)
        ep = refinement_loop("x", make_target("line"), LoopConfig(), four_bar_backends(), opt)[0]
        assert not ep.converged and ep.rounds == 10 and len(ep.records) == 11
        assert set(ep.incumbent_values) == {0.5}

    def test_converged_at_proposal(self):
        opt = ScriptedValues([0.001])
        ep = refinement_loop("x", make_target("line"), LoopConfig(), four_bar_backends(), opt)[0]
        assert ep.converged and ep.rounds == 0
