import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linksym.cli import main
from linksym.harness import (
    COLUMNS,
    ExperimentConfig,
    RunRecord,
    aggregate,
    cell,
    expand_configs,
    format_index,
    format_row,
    load_configs,
    normalized_index,
    read_results,
    run_matrix,
    summarize,
)
from linksym.linkage import canned_linkages, simulate
from linksym.plotting import render_mechanism, render_trace
from linksym.targets import make_target

FAST = dict(samples=2, max_rounds=1, grid_resolution=2)


def rec(i, chamfer=None, success=True, semantic=1.0, imp_round=0, links=4):
    return RunRecord(i, i, success, chamfer, 1 if success else None, 10.0 if success else None,
                     imp_round if success else None, semantic, links if success else None, 0 if success else None)


def gids(path):
    root = ET.parse(path).getroot()
    return [el.get("id") for el in root.iter() if el.get("id")]


class TestConfig:
    def test_defaults_and_name(self):
        c = ExperimentConfig()
        assert c.name == "line_grid_p1_dr1_cl1" and c.model_label == "Scripted"
        assert ExperimentConfig(shape="LB", optimizer="PSO", dr="off").name == "lemniscate_pso_p1_dr0_cl1"

    @pytest.mark.parametrize(
        "bad", [dict(optimizer="cma"), dict(samples=0), dict(backend="x"), dict(dr="maybe"), dict(shape="blob"), dict(pso_budget="8")]
    )
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            ExperimentConfig(**bad)

    def test_unknown_field(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({"shape": "line", "colour": "red"})

    def test_toggle_sweep_expands_to_eight(self):
        cs = expand_configs([{"shape": "ellipse", "planner": [True, False], "dr": ["on", "off"], "cl": [1, 0]}])
        assert len(cs) == 8 and len({c.name for c in cs}) == 8

    def test_load_forms(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"configs": [{"shape": "line", "optimizer": ["grid", "pso"]}]}))
        assert [c.optimizer for c in load_configs(p)] == ["grid", "pso"]
        p.write_text(json.dumps({"shape": "circle"}))
        assert load_configs(p)[0].shape == "circle"


class TestAggregation:
    def test_mean_se_example(self):
        a = aggregate([1.0, 2.0, 3.0])
        assert a.mean == 2.0 and abs(a.se - 1 / math.sqrt(3)) < 1e-12 and a.n == 3

    def test_failed_samples_excluded_except_semantic(self):
        rs = [rec(0, 1.0), rec(1, 3.0), rec(2, success=False, semantic=0.0)]
        s = summarize(rs)
        assert s["best_chamfer"].n == 2 and s["best_chamfer"].mean == 2.0
        assert s["semantic_pct"].n == 3 and s["semantic_pct"].mean == pytest.approx(200 / 3)

    def test_row_layout_and_flag(self):
        c = ExperimentConfig(shape="naca", optimizer="pso", planner=False)
        row = format_row(c, [rec(0, 0.5), rec(1, 0.7, imp_round=2)])
        assert row[:6] == ["Scripted", "NACA", "PSO", "off", "on", "on"]
        assert row[6] == "0.6000 ± 0.1000" and row[8].endswith(" *")

    def test_all_failed(self):
        row = format_row(ExperimentConfig(), [rec(0, success=False, semantic=0.0)])
        assert row[6] == "n/a" and row[9] == "0.0 ± 0.0"
        assert cell(None, 2) == "n/a"


class TestIndex:
    def test_examples(self):
        assert format_index(normalized_index([5.0, 0.588 * 5.0], 5.0)) == ["1.000", "0.588"]
        with pytest.raises(ValueError):
            normalized_index([1.0], 0.0)

    @given(st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=10), st.floats(1e-6, 1e6))
    def test_direct_division(self, values, base):
        assert normalized_index(values, base) == [v / base for v in values]


class TestPlotting:
    def test_four_bar_elements(self, tmp_path):
        lk = canned_linkages()["four-bar"]
        out = render_mechanism(lk, simulate(lk, 100), tmp_path / "m.svg", target=make_target("ellipse"))
        ids = gids(out)
        assert len([i for i in ids if i.startswith("bar-")]) == 4
        assert len([i for i in ids if i.startswith("traj-")]) >= 3
        assert ids.count("target") == 1

    def test_deterministic(self, tmp_path):
        lk = canned_linkages()["four-bar"]
        sim = simulate(lk, 100)
        a = render_mechanism(lk, sim, tmp_path / "a.svg").read_bytes()
        b = render_mechanism(lk, sim, tmp_path / "b.svg").read_bytes()
        assert a == b

    def test_unbuildable(self, tmp_path):
        from dataclasses import replace

        lk = canned_linkages()["four-bar"]
        bad = lk.replace_joint(replace(lk.joint("C"), dist0=0.1, dist1=0.1))
        with pytest.raises(ValueError):
            render_mechanism(bad, simulate(bad, 20), tmp_path / "x.svg")

    def test_trace(self, tmp_path):
        out = render_trace([[3.0, 2.0, 2.0], [4.0, 1.0]], tmp_path / "t.svg")
        assert [i for i in gids(out) if i.startswith("sample-")] == ["sample-0", "sample-1"]


class TestRun:
    def test_small_run(self, tmp_path):
        c = ExperimentConfig(**FAST)
        rows = run_matrix([c], tmp_path)
        assert len(rows) == 1 and len(rows[0]) == len(COLUMNS)
        table = read_results(tmp_path / "results.csv")
        assert list(table[0]) == COLUMNS
        assert (tmp_path / "results.csv").read_text().startswith("#")
        for i in range(2):
            lines = (tmp_path / f"history_{c.name}_s{i}.jsonl").read_text().splitlines()
            assert lines and all(json.loads(l)["episode"] == 0 for l in lines)
        assert (tmp_path / f"trace_{c.name}.csv").read_text().startswith("sample,round,best_chamfer")
        ET.parse(tmp_path / f"mech_{c.name}_0.svg")

    def test_recompute_from_samples_json(self, tmp_path):
        c = ExperimentConfig(**FAST)
        run_matrix([c], tmp_path)
        raw = json.loads((tmp_path / "samples.json").read_text())[c.name]
        samples = [RunRecord(**{**s, "history": []}) for s in raw["samples"]]
        assert format_row(ExperimentConfig.from_dict(raw["config"]), samples) == list(read_results(tmp_path / "results.csv")[0].values())

    def test_toggle_matrix_rows(self, tmp_path):
        cs = expand_configs([{**FAST, "samples": 1, "planner": [True, False], "dr": [True, False], "cl": [True, False]}])
        rows = run_matrix(cs, tmp_path)
        assert len(rows) == 8
        assert {tuple(r[3:6]) for r in rows} == {(p, d, c) for p in ("on", "off") for d in ("on", "off") for c in ("on", "off")}

    def test_abort_is_failed_sample(self, tmp_path, monkeypatch):
        monkeypatch.delenv("LINKSYM_API_URL", raising=False)
        rows = run_matrix([ExperimentConfig(backend="remote", samples=2)], tmp_path)
        assert rows[0][0] == "Remote" and rows[0][6] == "n/a"
        raw = json.loads((tmp_path / "samples.json").read_text())
        assert all(not s["success"] and s["error"] for s in raw["line_grid_p1_dr1_cl1"]["samples"])

    def test_duplicate_names(self, tmp_path):
        with pytest.raises(ValueError):
            run_matrix([ExperimentConfig(), ExperimentConfig(seed=3)], tmp_path)


class TestCli:
    def test_target(self, capsys):
        assert main(["target", "line", "--n-points", "5"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 5 and all(len(l.split(",")) == 2 for l in lines)

    def test_simulate_and_svg(self, tmp_path, capsys):
        p = tmp_path / "fb.json"
        p.write_text(canned_linkages()["four-bar"].to_json())
        assert main(["simulate", str(p), "--target", "ellipse", "--svg", str(tmp_path / "m.svg")]) == 0
        info = json.loads(capsys.readouterr().out)
        assert info["dof"] == 1 and info["buildable"] and info["chamfer"] > 0
        assert (tmp_path / "m.svg").exists()

    def test_lift(self, tmp_path, capsys):
        p = tmp_path / "fb.json"
        p.write_text(canned_linkages()["four-bar"].to_json())
        assert main(["lift", str(p), "--target", "ellipse"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("STRUCTURE dof=1") and "SPEC G_[0.00,1.00](in(R_in))" in out

    def test_optimize_trace(self, tmp_path, capsys):
        p = tmp_path / "fb.json"
        p.write_text(canned_linkages()["four-bar"].to_json())
        trace = tmp_path / "t.csv"
        assert main(["optimize", str(p), "--target", "line", "--resolution", "2", "--trace", str(trace)]) == 0
        assert trace.read_text().splitlines()[0] == "iteration,best_objective"

    def test_index(self, capsys):
        assert main(["index", "--baseline", "2", "1.176"]) == 0
        assert capsys.readouterr().out.strip() == "1.176,0.588"

    def test_errors_exit_2(self, tmp_path, capsys):
        assert main(["simulate", str(tmp_path / "missing.json")]) == 2
        assert main(["target", "spiral"]) == 2
        assert "error" in capsys.readouterr().err

    def test_run(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps([{**FAST, "samples": 1}]))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        assert capsys.readouterr().out.splitlines()[1] == ",".join(COLUMNS)


def test_numpy_free_records():
    r = rec(0, 1.0)
    assert json.dumps(r.to_dict()) and not any(isinstance(v, np.generic) for v in r.to_dict().values())
