"""Configuration-matrix runner: samples, aggregation and report files."""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

from .agents import (
    BackendError,
    Backends,
    LoopConfig,
    OptimizerSpec,
    RemoteBackend,
    refinement_loop,
    scripted_backend,
)
from .lifting import LiftingConfig
from .linkage import linkage_from_dict, simulate
from .metrics import improvement_pct, mean_se
from .optimizers import PENALTY, Budget
from .plotting import render_mechanism, render_trace
from .targets import make_target, shape_kind

log = logging.getLogger(__name__)

COLUMNS = [
    "Model",
    "Shape",
    "Opt",
    "Planner",
    "DR",
    "CL",
    "Best chamf.",
    "Steps",
    "% Imp.",
    "% Semantic",
    "Links",
    "Goal links",
]
HEADER_NOTE = (
    "# mean ± SE over samples; Best chamf., Steps, % Imp., Links and Goal links use successful samples only, "
    "% Semantic uses all samples; * marks % Imp. measured from a later first buildable round"
)
OPTIMIZERS = {"grid": "Grid", "pso": "PSO"}
BACKENDS = ("scripted", "remote")


def _flag(v: Any) -> bool:
    if isinstance(v, str):
        low = v.strip().lower()
        if low in ("on", "true", "yes", "1"):
            return True
        if low in ("off", "false", "no", "0"):
            return False
        raise ValueError(f"not a toggle: {v!r}")
    return bool(v)


@dataclass(frozen=True)
class ExperimentConfig:
    shape: str = "line"
    optimizer: str = "grid"
    planner: bool = True
    dr: bool = True
    cl: bool = True
    backend: str = "scripted"
    samples: int = 5
    seed: int = 0
    model: str = ""
    max_rounds: int = 10
    epsilon: float = 0.005
    candidates: int = 3
    grid_resolution: int = 4
    pso_budget: str = "8x8"
    goal_links: int = 4
    intent: str = ""
    n_points: int = 100

    def __post_init__(self):
        object.__setattr__(self, "shape", shape_kind(self.shape).value)
        opt = str(self.optimizer).lower()
        if opt not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        object.__setattr__(self, "optimizer", opt)
        for name in ("planner", "dr", "cl"):
            object.__setattr__(self, name, _flag(getattr(self, name)))
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        Budget.parse(self.pso_budget)

    @property
    def name(self) -> str:
        return f"{self.shape}_{self.optimizer}_p{int(self.planner)}_dr{int(self.dr)}_cl{int(self.cl)}"

    @property
    def model_label(self) -> str:
        if self.model:
            return self.model
        return "Scripted" if self.backend == "scripted" else "Remote"

    @property
    def intent_text(self) -> str:
        return self.intent or f"trace the {self.shape} target curve"

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def expand_configs(records: Iterable[Mapping[str, Any]]) -> list[ExperimentConfig]:
    """Each list-valued field multiplies the record into a cartesian product."""
    out = []
    for rec in records:
        keys = list(rec)
        axes = [rec[k] if isinstance(rec[k], list) else [rec[k]] for k in keys]
        for combo in itertools.product(*axes):
            out.append(ExperimentConfig.from_dict(dict(zip(keys, combo))))
    return out


def load_configs(path) -> list[ExperimentConfig]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data.get("configs", [data])
    if not isinstance(data, list):
        raise ValueError("config file must hold a list of records")
    return expand_configs(data)


@dataclass
class RunRecord:
    """Outcome of one sample of one config."""

    sample: int
    seed: int
    success: bool
    best_chamfer: Optional[float]
    steps: Optional[int]
    improvement_pct: Optional[float]
    imp_from_round: Optional[int]
    semantic_rate: float
    links: Optional[int]
    goal_links: Optional[int]
    trace: list[float] = field(default_factory=list)
    error: str = ""
    linkage: Optional[dict] = None
    history: list[str] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("history")
        return d


def _backends(config: ExperimentConfig) -> Backends:
    if config.backend == "scripted":
        return Backends.single(scripted_backend())
    return Backends.single(RemoteBackend(model=config.model or None))


def run_sample(config: ExperimentConfig, sample: int) -> RunRecord:
    seed = config.seed + sample
    target = make_target(config.shape, config.n_points)
    loop_cfg = LoopConfig(
        episodes=1,
        max_rounds=config.max_rounds,
        epsilon=config.epsilon,
        candidates=config.candidates,
        planner=config.planner,
        lifting=LiftingConfig(dr=config.dr, cl=config.cl, seed=seed),
    )
    optimizer = OptimizerSpec(config.optimizer, config.grid_resolution, Budget.parse(config.pso_budget))
    try:
        ep = refinement_loop(config.intent_text, target, loop_cfg, _backends(config), optimizer, seed=seed, shape=config.shape)[0]
    except BackendError as e:
        return RunRecord(sample, seed, False, None, None, None, None, 0.0, None, None, error=str(e))
    history = [r.to_json() for r in ep.records]
    inc = ep.incumbent
    success = inc is not None and not ep.aborted and inc.value < PENALTY
    if not success:
        return RunRecord(
            sample, seed, False, None, None, None, None, ep.semantic_rate, None, None,
            trace=ep.incumbent_values, error=ep.aborted or "no buildable mechanism", history=history,
        )
    first = next(r for r in ep.records if r.buildable and r.value is not None and r.value < PENALTY)
    imp = improvement_pct(first.value, inc.value) if first.value > 0 else 0.0
    return RunRecord(
        sample,
        seed,
        True,
        inc.value,
        ep.best_round,
        imp,
        first.round,
        ep.semantic_rate,
        inc.sim.n_links,
        inc.sim.n_links - config.goal_links,
        trace=ep.incumbent_values,
        linkage=inc.linkage.to_dict(),
        history=history,
    )


def _job(args: tuple[ExperimentConfig, int]) -> RunRecord:
    return run_sample(*args)


@dataclass(frozen=True)
class Aggregate:
    mean: float
    se: float
    n: int


def aggregate(values: Sequence[Optional[float]]) -> Optional[Aggregate]:
    v = [x for x in values if x is not None]
    if not v:
        return None
    m, s = mean_se(v)
    return Aggregate(m, s, len(v))


def summarize(records: Sequence[RunRecord]) -> dict[str, Optional[Aggregate]]:
    ok = [r for r in records if r.success]
    return {
        "best_chamfer": aggregate([r.best_chamfer for r in ok]),
        "steps": aggregate([r.steps for r in ok]),
        "improvement_pct": aggregate([r.improvement_pct for r in ok]),
        "semantic_pct": aggregate([100.0 * r.semantic_rate for r in records]),
        "links": aggregate([r.links for r in ok]),
        "goal_links": aggregate([r.goal_links for r in ok]),
    }


_PRECISION = {"best_chamfer": 4, "steps": 1, "improvement_pct": 1, "semantic_pct": 1, "links": 1, "goal_links": 1}


def cell(agg: Optional[Aggregate], digits: int) -> str:
    if agg is None:
        return "n/a"
    return f"{agg.mean:.{digits}f} ± {agg.se:.{digits}f}"


def format_row(config: ExperimentConfig, records: Sequence[RunRecord]) -> list[str]:
    summary = summarize(records)
    cells = {k: cell(v, _PRECISION[k]) for k, v in summary.items()}
    if any(r.success and r.imp_from_round not in (None, 0) for r in records):
        cells["improvement_pct"] += " *"
    onoff = lambda b: "on" if b else "off"  # noqa: E731
    return [
        config.model_label,
        shape_kind(config.shape).label,
        OPTIMIZERS[config.optimizer],
        onoff(config.planner),
        onoff(config.dr),
        onoff(config.cl),
        cells["best_chamfer"],
        cells["steps"],
        cells["improvement_pct"],
        cells["semantic_pct"],
        cells["links"],
        cells["goal_links"],
    ]


def results_csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    buf.write(HEADER_NOTE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def read_results(path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def normalized_index(values: Sequence[float], baseline: float) -> list[float]:
    """Each value divided by the baseline; below 1.0 is an improvement."""
    if not baseline > 0:
        raise ValueError("baseline must be positive")
    return [float(v) / baseline for v in values]


def format_index(ratios: Sequence[float]) -> list[str]:
    return [f"{r:.3f}" for r in ratios]


def _write_outputs(config: ExperimentConfig, records: list[RunRecord], out: Path) -> None:
    name = config.name
    for r in records:
        (out / f"history_{name}_s{r.sample}.jsonl").write_text("".join(h + "\n" for h in r.history), encoding="utf-8")
    with open(out / f"trace_{name}.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "round", "best_chamfer"])
        for r in records:
            for k, v in enumerate(r.trace):
                w.writerow([r.sample, k, repr(v)])
    render_trace([r.trace for r in records], out / f"trace_{name}.svg", title=name)
    target = make_target(config.shape, config.n_points)
    for r in records:
        if r.linkage is None:
            continue
        lk = linkage_from_dict(r.linkage)
        sim = simulate(lk)
        if sim.buildable:
            render_mechanism(lk, sim, out / f"mech_{name}_{r.sample}.svg", target=target)


def run_matrix(configs: Sequence[ExperimentConfig], out, workers: int = 1) -> list[list[str]]:
    """Run every config ``samples`` times, write the report files and return the table rows."""
    names = [c.name for c in configs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ValueError(f"configs share output names: {dupes}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(c, i) for c in configs for i in range(c.samples)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    by_config: dict[str, list[RunRecord]] = {c.name: [] for c in configs}
    for (c, _), rec in zip(jobs, results):
        by_config[c.name].append(rec)
        if not rec.success:
            log.warning("%s sample %d failed: %s", c.name, rec.sample, rec.error)

    rows = []
    raw = {}
    for c in configs:
        recs = by_config[c.name]
        _write_outputs(c, recs, out)
        rows.append(format_row(c, recs))
        raw[c.name] = {
            "config": c.to_dict(),
            "samples": [r.to_dict() for r in recs],
            "aggregate": {k: asdict(v) if v else None for k, v in summarize(recs).items()},
        }
    (out / "results.csv").write_text(results_csv(rows), encoding="utf-8")
    (out / "samples.json").write_text(json.dumps(raw, indent=2, sort_keys=True), encoding="utf-8")
    return rows
