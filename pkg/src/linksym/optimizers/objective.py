from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linkage import Linkage, LinkageError, Trajectory, simulate
from ..metrics import ICP_STARTS, score
from .space import ParamSpace

PENALTY = 1e6
OBJECTIVE_STEPS = 100


@dataclass
class LinkageObjective:
    """Chamfer after ICP between a parameterized mechanism and the target.

    Any linkage that fails validation or cannot be assembled over the full
    crank turn scores the flat ``penalty``.
    """

    topology: Linkage
    space: ParamSpace
    target: Trajectory
    n_steps: int = OBJECTIVE_STEPS
    penalty: float = PENALTY
    n_starts: int = ICP_STARTS
    evaluations: int = 0

    def __post_init__(self):
        self.space.check(self.topology)
        self._target = np.asarray(self.target.samples)

    def linkage(self, values) -> Linkage:
        return self.space.instantiate(self.topology, values)

    def __call__(self, values) -> float:
        lk = self.linkage(values)
        self.evaluations += 1
        try:
            sim = simulate(lk, self.n_steps)
        except LinkageError:
            return self.penalty
        if not sim.buildable:
            return self.penalty
        return score(sim.effector.samples, self._target, n_starts=self.n_starts).chamfer


def objective(topology: Linkage, params, target: Trajectory, space: ParamSpace | None = None, n_steps: int = OBJECTIVE_STEPS) -> float:
    from .space import default_space

    space = space if space is not None else default_space(topology)
    return LinkageObjective(topology, space, target, n_steps)(params)
