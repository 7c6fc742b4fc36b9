"""Real-coded GA and the enumerate-then-fit baseline."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..linkage import Linkage, Trajectory
from ..metrics import mean_se
from .objective import OBJECTIVE_STEPS, LinkageObjective
from .search import Budget, MapFn, Objective, OptimizerResult, _evaluate
from .space import ParamSpace
from .topologies import enumerate_topologies

TOURNAMENT = 3
BLX_ALPHA = 0.5
MUTATION_SIGMA = 0.05
ELITES = 1


def _tournament(rng: np.random.Generator, fitness: np.ndarray) -> int:
    picks = rng.integers(0, fitness.shape[0], size=min(TOURNAMENT, fitness.shape[0]))
    return int(picks[np.argmin(fitness[picks])])


def genetic(
    fn: Objective,
    space: ParamSpace,
    budget: Budget,
    rng: np.random.Generator,
    init: np.ndarray | None = None,
    map_fn: MapFn | None = None,
) -> OptimizerResult:
    """Tournament selection, blend crossover, Gaussian mutation, one elite.

    ``trace[g]`` is the best objective in generation ``g`` (generation 0 is
    the initial population), so there are ``generations + 1`` entries.
    """
    lo, hi = space.lower, space.upper
    span = hi - lo
    n, d = budget.population, len(space)
    pop = lo + rng.random((n, d)) * span
    if init is not None:
        pop[0] = np.clip(np.asarray(init, dtype=float), lo, hi)
    fit = np.array(_evaluate(fn, list(pop), map_fn))
    evals = n
    trace = [float(fit.min())]
    for _ in range(budget.generations):
        order = np.argsort(fit, kind="stable")
        children = [pop[i].copy() for i in order[:ELITES]]
        while len(children) < n:
            a = pop[_tournament(rng, fit)]
            b = pop[_tournament(rng, fit)]
            low, high = np.minimum(a, b), np.maximum(a, b)
            ext = BLX_ALPHA * (high - low)
            child = low - ext + rng.random(d) * (high - low + 2.0 * ext)
            child = child + rng.normal(0.0, MUTATION_SIGMA, d) * span
            children.append(np.clip(child, lo, hi))
        new = np.array(children[:n])
        new_fit = np.empty(n)
        new_fit[:ELITES] = fit[order[:ELITES]]
        new_fit[ELITES:] = _evaluate(fn, list(new[ELITES:]), map_fn)
        evals += n - ELITES
        pop, fit = new, new_fit
        trace.append(float(fit.min()))
    best = int(np.argmin(fit))
    return OptimizerResult(pop[best].copy(), float(fit[best]), trace, evals)


@dataclass
class EnumGAResult:
    best_linkage: Linkage
    best_value: float
    trace: list[float]
    per_topology: dict[str, OptimizerResult] = field(default_factory=dict)


def enum_ga(
    target: Trajectory,
    n_bars: int,
    budget: Budget,
    seed: int = 0,
    n_steps: int = OBJECTIVE_STEPS,
    map_fn: MapFn | None = None,
) -> EnumGAResult:
    """Fit every enumerated topology with the GA and keep the overall best."""
    results: dict[str, OptimizerResult] = {}
    best: tuple[float, Linkage] | None = None
    for idx, tpl in enumerate(enumerate_topologies(n_bars)):
        obj = LinkageObjective(tpl.linkage, tpl.space, target, n_steps)
        rng = np.random.default_rng([seed, idx])
        res = genetic(obj, tpl.space, budget, rng, init=tpl.space.values_of(tpl.linkage), map_fn=map_fn)
        results[tpl.name] = res
        if best is None or res.best_value < best[0]:
            best = (res.best_value, obj.linkage(res.best_params))
    assert best is not None
    trace = np.min(np.array([r.trace for r in results.values()]), axis=0).tolist()
    return EnumGAResult(best[1], best[0], trace, results)


@dataclass(frozen=True)
class SweepRow:
    budget: str
    bars: int
    n: int
    mean: float
    se: float

    def cells(self) -> list[str]:
        return [self.budget, str(self.bars), str(self.n), f"{self.mean:.3f} ± {self.se:.3f}"]


SWEEP_HEADER = ["Pop. x Gen.", "Bars", "n", "Best chamf."]


def budget_sweep(
    targets: dict[str, Trajectory],
    budgets=(Budget(3, 20), Budget(6, 20)),
    bars=(4, 6),
    seeds=(0,),
    n_steps: int = OBJECTIVE_STEPS,
) -> list[SweepRow]:
    """Best Chamfer of Enum+GA, grouped by budget and bar family.

    Each group aggregates over every (target, seed) pair.
    """
    rows = []
    for b in budgets:
        for nb in bars:
            vals = [enum_ga(t, nb, b, s, n_steps).best_value for t in targets.values() for s in seeds]
            m, se = mean_se(vals)
            rows.append(SweepRow(str(b), nb, len(vals), m, se))
    return rows


def format_sweep(rows: list[SweepRow], sep: str = ",") -> str:
    lines = [sep.join(SWEEP_HEADER)]
    lines += [sep.join(r.cells()) for r in rows]
    return "\n".join(lines) + "\n"
