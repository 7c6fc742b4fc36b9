"""Closed propose / optimize / lift / critique / plan / refine loop."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional


from ..linkage import Linkage, LinkageError, SimulationResult, Trajectory, simulate
from ..lifting import LiftingConfig, lift
from ..metrics import Score, score
from ..optimizers import Budget, LinkageObjective, default_space, grid_search, pso
from ..optimizers.objective import PENALTY
from .backends import BackendError, Backends
from .planning import DEFAULT_TABLE, FailureModeTable, PlanParseError
from .roles import (
    CANDIDATES,
    Attempt,
    ExemplarMemory,
    RefinementError,
    TopologyError,
    critic,
    plan,
    refine,
    topology_agent,
)

EPSILON = 0.005
R_MAX = 10
SIM_STEPS = 100


@dataclass
class Candidate:
    linkage: Linkage
    value: float
    sim: SimulationResult
    score: Optional[Score]
    trace: list[float] = field(default_factory=list)


Optimizer = Callable[[Linkage, Trajectory, int], Candidate]


def evaluate_linkage(linkage: Linkage, target: Trajectory, n_steps: int = SIM_STEPS) -> Candidate:
    try:
        sim = simulate(linkage, n_steps)
    except LinkageError as e:
        sim = SimulationResult({}, False, list(e.diagnostics), 0, linkage.target)
    if not sim.buildable:
        return Candidate(linkage, PENALTY, sim, None)
    sc = score(sim.effector.samples, target.samples)
    return Candidate(linkage, sc.chamfer, sim, sc)


@dataclass(frozen=True)
class OptimizerSpec:
    """Which optimizer fits the parameters of each proposed topology."""

    kind: str = "grid"
    resolution: int = 4
    budget: Budget = Budget(8, 8)
    n_steps: int = SIM_STEPS

    def __post_init__(self):
        if self.kind not in ("grid", "pso", "none"):
            raise ValueError(f"unknown optimizer {self.kind!r}")

    def __call__(self, linkage: Linkage, target: Trajectory, seed: int = 0) -> Candidate:
        start = evaluate_linkage(linkage, target, self.n_steps)
        if self.kind == "none":
            return start
        space = default_space(linkage)
        obj = LinkageObjective(linkage, space, target, self.n_steps)
        if self.kind == "grid":
            res = grid_search(obj, space, self.resolution)
        else:
            res = pso(obj, space, self.budget, seed=seed, init=space.values_of(linkage))
        trace = [min(start.value, v) for v in res.trace]
        if res.best_value < start.value:
            best = evaluate_linkage(obj.linkage(res.best_params), target, self.n_steps)
            best.trace = trace
            return best
        start.trace = trace
        return start


@dataclass(frozen=True)
class LoopConfig:
    episodes: int = 1
    max_rounds: int = R_MAX
    epsilon: float = EPSILON
    candidates: int = CANDIDATES
    planner: bool = True
    lifting: LiftingConfig = LiftingConfig()

    def __post_init__(self):
        if self.episodes < 1 or self.max_rounds < 0 or self.candidates < 1 or not self.epsilon >= 0:
            raise ValueError("invalid loop configuration")


@dataclass
class IterationRecord:
    episode: int
    round: int
    stage: str
    linkage: Optional[dict]
    value: Optional[float]
    incumbent: Optional[float]
    accepted: bool
    dof: Optional[int] = None
    n_links: Optional[int] = None
    buildable: Optional[bool] = None
    bundle: str = ""
    report: str = ""
    plan: Optional[dict] = None
    attempts: list[dict] = field(default_factory=list)
    trace: list[float] = field(default_factory=list)
    error: str = ""

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


@dataclass
class Episode:
    index: int
    records: list[IterationRecord] = field(default_factory=list)
    incumbent: Optional[Candidate] = None
    initial_value: Optional[float] = None
    best_round: int = 0
    rounds: int = 0
    converged: bool = False
    aborted: str = ""
    attempts: list[Attempt] = field(default_factory=list)

    @property
    def incumbent_values(self) -> list[float]:
        return [r.incumbent for r in self.records if r.incumbent is not None]

    @property
    def semantic_rate(self) -> float:
        if not self.attempts:
            return 0.0
        return sum(a.semantic_success for a in self.attempts) / len(self.attempts)


def _record(ep: Episode, rnd: int, stage: str, cand: Optional[Candidate], accepted: bool, **kw) -> IterationRecord:
    inc = ep.incumbent.value if ep.incumbent is not None else None
    rec = IterationRecord(
        ep.index,
        rnd,
        stage,
        cand.linkage.to_dict() if cand is not None else None,
        cand.value if cand is not None else None,
        inc,
        accepted,
        cand.sim.dof if cand is not None else None,
        cand.sim.n_links if cand is not None else None,
        cand.sim.buildable if cand is not None else None,
        trace=list(cand.trace) if cand is not None else [],
        **kw,
    )
    ep.records.append(rec)
    return rec


def run_episode(
    index: int,
    intent: str,
    target: Trajectory,
    config: LoopConfig,
    backends: Backends,
    optimizer: Optimizer,
    memory: ExemplarMemory,
    seed: int = 0,
    shape: str | None = None,
    table: FailureModeTable = DEFAULT_TABLE,
    on_record: Callable[[IterationRecord], None] | None = None,
) -> Episode:
    ep = Episode(index)

    def emit(rec):
        if on_record is not None:
            on_record(rec)

    try:
        proposal = topology_agent(intent, target, memory, backends.topology, shape, config.candidates)
    except TopologyError as e:
        ep.attempts += e.attempts
        ep.aborted = str(e)
        emit(_record(ep, 0, "propose", None, False, attempts=[a.to_dict() for a in e.attempts], error=str(e)))
        return ep
    except BackendError as e:
        ep.aborted = str(e)
        emit(_record(ep, 0, "propose", None, False, error=str(e)))
        return ep
    ep.attempts += proposal.attempts
    cand = optimizer(proposal.linkage, target, seed)
    ep.incumbent = cand
    ep.initial_value = cand.value
    emit(_record(ep, 0, "propose", cand, True, attempts=[a.to_dict() for a in proposal.attempts]))
    if cand.value <= config.epsilon:
        ep.converged = True
        memory.add(intent, cand.linkage, cand.value)
        return ep

    for rnd in range(1, config.max_rounds + 1):
        ep.rounds = rnd
        inc = ep.incumbent
        transform = inc.score.transform if inc.score is not None else None
        bundle = lift(inc.sim, target, config.lifting, transform)
        try:
            report = critic(inc.linkage, inc.score, inc.sim, bundle, backends.critic)
            the_plan = plan(report, backends.planner, table) if config.planner else None
        except PlanParseError as e:
            emit(_record(ep, rnd, "plan", None, False, bundle=bundle.to_text(), error=f"plan: {e}"))
            continue
        except BackendError as e:
            ep.aborted = str(e)
            emit(_record(ep, rnd, "critic", None, False, bundle=bundle.to_text(), error=str(e)))
            break
        try:
            edited, attempts = refine(
                inc.linkage,
                the_plan,
                bundle,
                memory,
                backends.refiner,
                report=report,
                candidates=config.candidates,
            )
        except RefinementError as e:
            ep.attempts += e.attempts
            emit(
                _record(
                    ep,
                    rnd,
                    "refine",
                    None,
                    False,
                    bundle=bundle.to_text(),
                    report=report.to_text(),
                    plan=the_plan.to_dict() if the_plan else None,
                    attempts=[a.to_dict() for a in e.attempts],
                    error=str(e),
                )
            )
            continue
        except BackendError as e:
            ep.aborted = str(e)
            emit(_record(ep, rnd, "refine", None, False, bundle=bundle.to_text(), report=report.to_text(), error=str(e)))
            break
        ep.attempts += attempts
        new = optimizer(edited, target, seed + rnd)
        accepted = new.value < inc.value
        if accepted:
            ep.incumbent = new
            ep.best_round = rnd
        emit(
            _record(
                ep,
                rnd,
                "refine",
                new,
                accepted,
                bundle=bundle.to_text(),
                report=report.to_text(),
                plan=the_plan.to_dict() if the_plan else None,
                attempts=[a.to_dict() for a in attempts],
            )
        )
        if ep.incumbent.value <= config.epsilon:
            ep.converged = True
            break
    if ep.incumbent is not None:
        memory.add(intent, ep.incumbent.linkage, ep.incumbent.value)
    return ep


def refinement_loop(
    intent: str,
    target: Trajectory,
    config: LoopConfig,
    backends: Backends,
    optimizer: Optimizer = OptimizerSpec(),
    memory: ExemplarMemory | None = None,
    seed: int = 0,
    shape: str | None = None,
    table: FailureModeTable = DEFAULT_TABLE,
    on_record: Callable[[IterationRecord], None] | None = None,
) -> list[Episode]:
    memory = memory if memory is not None else ExemplarMemory()
    return [
        run_episode(e, intent, target, config, backends, optimizer, memory, seed, shape, table, on_record)
        for e in range(config.episodes)
    ]


def best_of(episodes: list[Episode]) -> Optional[Episode]:
    done = [e for e in episodes if e.incumbent is not None]
    return min(done, key=lambda e: e.incumbent.value) if done else None


def write_history(episodes: list[Episode], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ep in episodes:
            for rec in ep.records:
                fh.write(rec.to_json() + "\n")


__all__ = [
    "Candidate",
    "EPSILON",
    "Episode",
    "IterationRecord",
    "LoopConfig",
    "OptimizerSpec",
    "R_MAX",
    "best_of",
    "evaluate_linkage",
    "refinement_loop",
    "run_episode",
    "write_history",
]
