from .ga import EnumGAResult, SweepRow, budget_sweep, enum_ga, format_sweep, genetic
from .objective import PENALTY, LinkageObjective, objective
from .search import GRID_CAP, PSO_HYPER, Budget, OptimizerResult, grid_resolution, grid_search, pso
from .space import ParamSpace, ParamSpec, default_space, length_space
from .topologies import Template, enumerate_topologies

__all__ = [
    "Budget",
    "EnumGAResult",
    "GRID_CAP",
    "LinkageObjective",
    "OptimizerResult",
    "PENALTY",
    "PSO_HYPER",
    "ParamSpace",
    "ParamSpec",
    "SweepRow",
    "Template",
    "budget_sweep",
    "default_space",
    "enum_ga",
    "enumerate_topologies",
    "format_sweep",
    "genetic",
    "grid_resolution",
    "grid_search",
    "length_space",
    "objective",
    "pso",
]
