"""Grid search and particle swarm over a box."""
from __future__ import annotations

import csv
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .space import ParamSpace

GRID_CAP = 100_000
PSO_HYPER = (0.72, 1.49, 1.49)
VELOCITY_CLAMP = 0.2

Objective = Callable[[np.ndarray], float]
MapFn = Callable[[Callable, Iterable], Iterable]


@dataclass(frozen=True)
class Budget:
    population: int
    generations: int

    def __post_init__(self):
        if self.population < 1 or self.generations < 1:
            raise ValueError("budget needs population >= 1 and generations >= 1")

    @classmethod
    def parse(cls, text: str) -> "Budget":
        p, sep, g = text.lower().replace("×", "x").partition("x")
        if not sep:
            raise ValueError(f"budget must look like PxG, got {text!r}")
        return cls(int(p), int(g))

    @property
    def evaluations(self) -> int:
        return self.population * self.generations

    def __str__(self) -> str:
        return f"{self.population}x{self.generations}"


@dataclass
class OptimizerResult:
    best_params: np.ndarray
    best_value: float
    trace: list[float] = field(default_factory=list)
    n_evals: int = 0

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "best_objective"])
            for i, v in enumerate(self.trace):
                w.writerow([i, repr(float(v))])


def _evaluate(fn: Objective, points: Sequence[np.ndarray], map_fn: MapFn | None) -> list[float]:
    mapper = map_fn or map
    return [float(v) for v in mapper(fn, points)]


def grid_resolution(space: ParamSpace, resolution: int | Sequence[int], cap: int = GRID_CAP) -> tuple[int, ...]:
    """Per-axis resolution, shrunk uniformly when the lattice exceeds ``cap``."""
    d = len(space)
    res = (resolution,) * d if isinstance(resolution, (int, np.integer)) else tuple(int(r) for r in resolution)
    if len(res) != d:
        raise ValueError(f"resolution has {len(res)} entries for {d} parameters")
    if any(r < 2 for r in res):
        raise ValueError("grid resolution must be at least 2 per axis")
    if math.prod(res) <= cap:
        return res
    if 2**d > cap:
        raise ValueError(f"grid cap exceeded: even 2 points per axis gives {2**d} > {cap}")
    per = max(2, int(math.floor(cap ** (1.0 / d) + 1e-9)))
    while per**d > cap:
        per -= 1
    reduced = tuple(min(r, per) for r in res)
    warnings.warn(f"grid of {math.prod(res)} points exceeds cap {cap}; resolution reduced to {reduced}", RuntimeWarning)
    return reduced


def grid_search(
    fn: Objective,
    space: ParamSpace,
    resolution: int | Sequence[int] = 5,
    cap: int = GRID_CAP,
    map_fn: MapFn | None = None,
) -> OptimizerResult:
    """Exhaustive lattice search; the first lattice point wins ties."""
    res = grid_resolution(space, resolution, cap)
    axes = [np.linspace(lo, hi, r) for lo, hi, r in zip(space.lower, space.upper, res)]
    points = [np.array(p) for p in itertools.product(*axes)]
    values = _evaluate(fn, points, map_fn)
    best_i = 0
    trace = []
    for i, v in enumerate(values):
        if v < values[best_i]:
            best_i = i
        trace.append(values[best_i])
    return OptimizerResult(points[best_i], values[best_i], trace, len(points))


def pso(
    fn: Objective,
    space: ParamSpace,
    budget: Budget = Budget(30, 100),
    hyper: tuple[float, float, float] = PSO_HYPER,
    seed: int = 0,
    map_fn: MapFn | None = None,
    init: np.ndarray | None = None,
) -> OptimizerResult:
    """Global-best PSO with velocity clamping and reflecting walls.

    ``trace[0]`` is the best initial particle and ``trace[k]`` the global best
    after iteration ``k``. ``init`` optionally seeds particle 0.
    """
    w, c1, c2 = hyper
    rng = np.random.default_rng(seed)
    lo, hi = space.lower, space.upper
    span = hi - lo
    vmax = VELOCITY_CLAMP * span
    n, d = budget.population, len(space)
    x = lo + rng.random((n, d)) * span
    if init is not None:
        x[0] = np.clip(np.asarray(init, dtype=float), lo, hi)
    v = (rng.random((n, d)) * 2.0 - 1.0) * vmax
    f = np.array(_evaluate(fn, list(x), map_fn))
    pbest, pval = x.copy(), f.copy()
    g = int(np.argmin(pval))
    gbest, gval = pbest[g].copy(), float(pval[g])
    trace = [gval]
    evals = n
    for _ in range(budget.generations):
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        v = w * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)
        v = np.clip(v, -vmax, vmax)
        x = x + v
        over, under = x > hi, x < lo
        x = np.where(over, 2.0 * hi - x, x)
        x = np.where(under, 2.0 * lo - x, x)
        v = np.where(over | under, -v, v)
        x = np.clip(x, lo, hi)
        f = np.array(_evaluate(fn, list(x), map_fn))
        evals += n
        better = f < pval
        pbest[better] = x[better]
        pval[better] = f[better]
        g = int(np.argmin(pval))
        if pval[g] < gval:
            gbest, gval = pbest[g].copy(), float(pval[g])
        trace.append(gval)
    return OptimizerResult(gbest, gval, trace, evals)
