"""The four agent roles. Backends supply text; numbers come from the pipeline."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from string import Template
from typing import Optional

import numpy as np

from ..linkage import (
    Linkage,
    LinkageError,
    LinkageParseError,
    SimulationResult,
    Trajectory,
    dof,
    parse_linkage,
    simulate,
    validate,
)
from ..lifting import RepresentationBundle
from ..metrics import Score
from ..optimizers.space import ParamSpace, default_space
from ..targets import describe
from .backends import AgentBackend
from .planning import DEFAULT_TABLE, FailureMode, FailureModeTable, PlanParseError, RefinementPlan, parse_plan

CANDIDATES = 3

JSON_CONTRACT = """{
  "name": str, "target": <effector joint id>, "intent": str (optional),
  "joints": [
    {"id": str, "kind": "fixed", "x": float, "y": float},
    {"id": str, "kind": "crank", "anchor": <fixed id>, "radius": float > 0, "initial_angle": float},
    {"id": str, "kind": "revolute", "parent0": id, "parent1": id, "dist0": float > 0, "dist1": float > 0,
     "branch": "positive" | "negative"}
  ]
}
Joints are listed so that parents come first; exactly one crank."""


@lru_cache(maxsize=None)
def load_prompt(role: str) -> str:
    return resources.files("linksym.agents").joinpath("prompts", f"{role}.txt").read_text(encoding="utf-8")


def render_prompt(role: str, **values: str) -> str:
    return Template(load_prompt(role)).safe_substitute(contract=JSON_CONTRACT, **values)


class TopologyError(RuntimeError):
    def __init__(self, message: str, attempts: list["Attempt"]):
        super().__init__(message)
        self.attempts = attempts


class RefinementError(RuntimeError):
    def __init__(self, message: str, attempts: list["Attempt"]):
        super().__init__(message)
        self.attempts = attempts


@dataclass(frozen=True)
class Attempt:
    """One backend output and whether it parsed and simulated."""

    parsed: bool
    buildable: bool
    error: str = ""

    @property
    def semantic_success(self) -> bool:
        return self.parsed and self.buildable

    def to_dict(self) -> dict:
        return {"parsed": self.parsed, "buildable": self.buildable, "error": self.error}


@dataclass(frozen=True)
class Exemplar:
    intent: str
    linkage_json: str
    score: float


class ExemplarMemory:
    """Bounded store of past designs, rendered best first."""

    def __init__(self, maxlen: int = 8):
        self._items: deque[Exemplar] = deque(maxlen=maxlen)

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    @property
    def maxlen(self) -> int:
        return self._items.maxlen or 0

    def add(self, intent: str, linkage: Linkage, score: float) -> None:
        self._items.append(Exemplar(intent, linkage.to_json(), float(score)))

    def render(self) -> str:
        if not self._items:
            return "(no exemplars)"
        ranked = sorted(self._items, key=lambda e: e.score)
        return "\n".join(f"- intent: {e.intent}\n  score: {e.score!r}\n  linkage: {e.linkage_json}" for e in ranked)


@dataclass
class TopologyProposal:
    linkage: Linkage
    params: np.ndarray
    space: ParamSpace
    rationale: str
    attempts: list[Attempt] = field(default_factory=list)


def _check_candidate(text: str) -> tuple[Optional[Linkage], Attempt]:
    try:
        lk = parse_linkage(text)
    except (LinkageParseError, ValueError, TypeError) as e:
        return None, Attempt(False, False, f"parse: {e}")
    diags = validate(lk)
    if diags:
        return lk, Attempt(True, False, "; ".join(str(d) for d in diags))
    sim = simulate(lk, 60)
    if not sim.buildable:
        return lk, Attempt(True, False, "; ".join(str(d) for d in sim.diagnostics))
    return lk, Attempt(True, True)


def _rationale(text: str) -> str:
    start = text.find("{")
    return text[:start].strip() if start > 0 else ""


def topology_agent(
    intent: str,
    target: Trajectory,
    memory: ExemplarMemory,
    backend: AgentBackend,
    shape: str | None = None,
    candidates: int = CANDIDATES,
) -> TopologyProposal:
    """Ask for a linkage until one parses, validates and assembles."""
    prompt = render_prompt("topology")
    context = f"INTENT: {intent}\nTARGET: {describe(target, shape)}\nEXEMPLARS:\n{memory.render()}"
    attempts: list[Attempt] = []
    for _ in range(candidates):
        text = backend.complete(prompt, context)
        lk, att = _check_candidate(text)
        attempts.append(att)
        if att.semantic_success and lk is not None:
            space = default_space(lk)
            return TopologyProposal(lk, space.values_of(lk), space, _rationale(text), attempts)
    raise TopologyError(f"no usable linkage after {candidates} attempts: {attempts[-1].error}", attempts)


# critic

BLOCKS = ("Kinematic Accuracy", "Mobility/DOF", "Compositionality", "Recommendation")


@dataclass(frozen=True)
class CriticReport:
    blocks: dict[str, str]

    def __post_init__(self):
        missing = [b for b in BLOCKS if b not in self.blocks]
        if missing:
            raise ValueError(f"critic report missing blocks: {missing}")

    def to_text(self) -> str:
        return "\n\n".join(f"[{b}]\n{self.blocks[b]}" for b in BLOCKS)


def _evidence(linkage: Linkage, score: Optional[Score], sim: SimulationResult, bundle: RepresentationBundle) -> dict[str, str]:
    acc = []
    if score is not None:
        acc.append(f"chamfer: {score.chamfer!r}")
        acc.append(f"icp_iterations: {score.iterations_used}")
        acc.append(f"icp_rotation_rad: {score.transform.rotation!r}")
    else:
        acc.append("chamfer: unavailable (no trajectory)")
    mob = [
        f"dof: {sim.dof}",
        f"links: {sim.n_links}",
        f"joints: {sim.n_joints}",
        f"buildable: {'yes' if sim.buildable else 'no'}",
        f"effector: {linkage.target}",
    ]
    mob += [f"diagnostic: {d}" for d in sim.diagnostics]
    comp = []
    if bundle.spec is None:
        comp.append("spec: absent" + (" (mechanism unbuildable, no trajectory to lift)" if not sim.buildable else ""))
    body = bundle.to_text()
    comp.append(body)
    return {
        "Kinematic Accuracy": "\n".join(acc),
        "Mobility/DOF": "\n".join(mob),
        "Compositionality": "\n".join(comp),
    }


def _split_prose(text: str) -> dict[str, str]:
    """Assign reply paragraphs to blocks by their headings."""
    out = {b: [] for b in BLOCKS}
    current = "Recommendation"
    for line in text.splitlines():
        stripped = line.strip().strip("*#[] ")
        head = next((b for b in BLOCKS if stripped.lower().startswith(b.lower())), None)
        if head is not None:
            current = head
            rest = stripped[len(head) :].lstrip(" :]*")
            if rest:
                out[current].append(rest)
            continue
        if line.strip():
            out[current].append(line.strip())
    return {b: " ".join(v) for b, v in out.items()}


def critic(
    linkage: Linkage,
    score: Optional[Score],
    sim: SimulationResult,
    bundle: RepresentationBundle,
    backend: AgentBackend,
) -> CriticReport:
    evidence = _evidence(linkage, score, sim, bundle)
    context = "\n\n".join(f"{k}:\n{v}" for k, v in evidence.items())
    context += f"\n\nLINKAGE:\n{linkage.to_json()}"
    prose = _split_prose(backend.complete(render_prompt("critic"), context))
    blocks = {}
    for b in BLOCKS[:3]:
        blocks[b] = evidence[b] + (f"\nnote: {prose[b]}" if prose[b] else "")
    rec = prose["Recommendation"]
    if not sim.buildable:
        diag = next((d for d in sim.diagnostics), None)
        ref = f"resolve {diag}" if diag is not None else "restore buildability"
        rec = f"{ref}. {rec}".strip()
    blocks["Recommendation"] = rec or "no recommendation"
    return CriticReport(blocks)


def plan(report: CriticReport, backend: AgentBackend, table: FailureModeTable = DEFAULT_TABLE) -> RefinementPlan:
    prompt = render_prompt("planner", modes=", ".join(m.value for m in FailureMode), table=table.render())
    return parse_plan(backend.complete(prompt, report.to_text()), table)


def refine(
    linkage: Linkage,
    plan_: Optional[RefinementPlan],
    bundle: RepresentationBundle,
    memory: ExemplarMemory,
    backend: AgentBackend,
    report: Optional[CriticReport] = None,
    candidates: int = CANDIDATES,
    required_dof: int = 1,
) -> tuple[Linkage, list[Attempt]]:
    """Ask for an edited linkage; reject edits that break validity or mobility."""
    parts = []
    if plan_ is not None:
        parts.append(f"PLAN:\n{plan_.to_text()}")
    if report is not None:
        parts.append(f"REPORT:\n{report.to_text()}")
    parts.append(f"BUNDLE:\n{bundle.to_text()}")
    parts.append(f"EXEMPLARS:\n{memory.render()}")
    parts.append(f"CURRENT LINKAGE:\n{linkage.to_json()}")
    context = "\n\n".join(parts)
    attempts: list[Attempt] = []
    for _ in range(candidates):
        text = backend.complete(render_prompt("refiner"), context)
        lk, att = _check_candidate(text)
        if lk is not None and att.parsed and not validate(lk):
            try:
                f = dof(lk)
            except LinkageError as e:
                f = None
                att = Attempt(True, att.buildable, str(e))
            if f != required_dof:
                att = Attempt(True, att.buildable, f"dof {f} != {required_dof}")
                attempts.append(att)
                continue
        attempts.append(att)
        if att.semantic_success and lk is not None:
            return lk, attempts
    raise RefinementError(f"no compliant edit after {candidates} attempts: {attempts[-1].error}", attempts)


def current_linkage(context: str) -> Linkage:
    """Recover the linkage embedded in a refiner context."""
    marker = "CURRENT LINKAGE:"
    i = context.rfind(marker)
    if i < 0:
        raise LinkageParseError("no current linkage in context")
    return parse_linkage(context[i + len(marker) :])


def report_value(text: str, key: str) -> Optional[str]:
    for line in text.splitlines():
        if line.strip().startswith(f"{key}:"):
            return line.split(":", 1)[1].strip()
    return None


__all__ = [
    "Attempt",
    "BLOCKS",
    "CANDIDATES",
    "CriticReport",
    "ExemplarMemory",
    "JSON_CONTRACT",
    "PlanParseError",
    "RefinementError",
    "TopologyError",
    "TopologyProposal",
    "critic",
    "current_linkage",
    "plan",
    "refine",
    "render_prompt",
    "report_value",
    "topology_agent",
]
