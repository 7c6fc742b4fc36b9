"""Agent roles, text backends and the refinement loop."""
from .backends import AgentBackend, BackendError, Backends, RemoteBackend, Rule, ScriptedBackend
from .loop import (
    EPSILON,
    R_MAX,
    Candidate,
    Episode,
    IterationRecord,
    LoopConfig,
    OptimizerSpec,
    best_of,
    evaluate_linkage,
    refinement_loop,
    write_history,
)
from .planning import DEFAULT_TABLE, FailureMode, FailureModeTable, PlanParseError, RefinementPlan, parse_plan
from .roles import (
    Attempt,
    CriticReport,
    ExemplarMemory,
    RefinementError,
    TopologyError,
    critic,
    plan,
    refine,
    topology_agent,
)
from .scripted import scripted_backend

__all__ = [
    "AgentBackend",
    "Attempt",
    "BackendError",
    "Backends",
    "Candidate",
    "CriticReport",
    "DEFAULT_TABLE",
    "EPSILON",
    "Episode",
    "ExemplarMemory",
    "FailureMode",
    "FailureModeTable",
    "IterationRecord",
    "LoopConfig",
    "OptimizerSpec",
    "PlanParseError",
    "R_MAX",
    "RefinementError",
    "RefinementPlan",
    "RemoteBackend",
    "Rule",
    "ScriptedBackend",
    "TopologyError",
    "best_of",
    "critic",
    "evaluate_linkage",
    "parse_plan",
    "plan",
    "refine",
    "refinement_loop",
    "scripted_backend",
    "topology_agent",
    "write_history",
]
