"""Planar linkage synthesis with symbolic trajectory feedback."""
from .linkage import (
    Branch,
    Crank,
    Fixed,
    Linkage,
    LinkageError,
    Revolute,
    SimulationResult,
    Trajectory,
    canned_linkages,
    dof,
    parse_linkage,
    simulate,
)
from .metrics import chamfer, icp_align, score
from .targets import make_target

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "Crank",
    "Fixed",
    "Linkage",
    "LinkageError",
    "Revolute",
    "SimulationResult",
    "Trajectory",
    "canned_linkages",
    "chamfer",
    "dof",
    "icp_align",
    "make_target",
    "parse_linkage",
    "score",
    "simulate",
]
