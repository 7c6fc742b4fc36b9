from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from ..linkage import LinkageParseError, extract_json


class PlanParseError(ValueError):
    pass


class FailureMode(str, Enum):
    OVERCONSTRAINT = "Overconstraint"
    UNDERCONSTRAINT = "Underconstraint"
    KINEMATIC_INACCURACY = "KinematicInaccuracy"
    PATH_DEVIATION = "PathDeviation"
    PATH_MISALIGNMENT = "PathMisalignment"
    NONE = "None"


def _key(text: str) -> str:
    return re.sub(r"[^a-z]", "", text.lower())


_MODE_KEYS = {_key(m.value): m for m in FailureMode}


def parse_mode(text: str) -> FailureMode:
    k = _key(text)
    if k in _MODE_KEYS:
        return _MODE_KEYS[k]
    if k.startswith("effective") and k[len("effective") :] in _MODE_KEYS:
        return _MODE_KEYS[k[len("effective") :]]
    raise PlanParseError(f"unknown failure mode {text!r}")


@dataclass(frozen=True)
class Action:
    template: str
    keywords: tuple[str, ...]


@dataclass(frozen=True)
class FailureModeTable:
    """Failure mode to canonical corrective action and its keyword family."""

    actions: Mapping[FailureMode, Action]

    def __post_init__(self):
        for required in (FailureMode.OVERCONSTRAINT, FailureMode.UNDERCONSTRAINT):
            if required not in self.actions:
                raise ValueError(f"table must cover {required.value}")

    def resolve(self, mode: FailureMode) -> str:
        return self.actions[mode].template if mode in self.actions else ""

    def matches(self, mode: FailureMode, action_text: str) -> bool:
        entry = self.actions.get(mode)
        if entry is None:
            return False
        low = action_text.lower()
        return any(k in low for k in entry.keywords)

    def render(self) -> str:
        return "\n".join(f"- {m.value}: {a.template}" for m, a in self.actions.items())


DEFAULT_TABLE = FailureModeTable(
    {
        FailureMode.OVERCONSTRAINT: Action("remove a redundant link", ("remove", "redundant", "drop", "delete", "eliminat")),
        FailureMode.UNDERCONSTRAINT: Action("add a loop", ("add", "loop", "introduce", "extra link", "sixth")),
        FailureMode.KINEMATIC_INACCURACY: Action("adjust link lengths", ("adjust", "length", "resize", "scale")),
        FailureMode.PATH_DEVIATION: Action("move the coupler point", ("coupler", "move", "offset")),
        FailureMode.PATH_MISALIGNMENT: Action("reposition the ground pivots", ("pivot", "ground", "reposition", "rotate")),
        FailureMode.NONE: Action("keep the topology", ("keep", "none", "no change")),
    }
)


@dataclass(frozen=True)
class RefinementPlan:
    failure_mode: FailureMode
    structural_cause: str
    suggested_action: str
    canonical_action: str = ""
    in_family: bool = True

    def to_dict(self) -> dict:
        return {
            "failure_mode": self.failure_mode.value,
            "structural_cause": self.structural_cause,
            "suggested_action": self.suggested_action,
            "canonical_action": self.canonical_action,
            "in_family": self.in_family,
        }

    def to_text(self) -> str:
        return (
            f"Failure Mode: {self.failure_mode.value}\n"
            f"Structural Cause: {self.structural_cause}\n"
            f"Suggested Action: {self.suggested_action}\n"
            f"Canonical Action: {self.canonical_action}"
        )


_FIELD = re.compile(r"^\s*\**\s*(failure[ _]mode|structural[ _]cause|suggested[ _]action)\s*\**\s*:\s*(.*)$", re.I | re.M)
_FIELD_NAMES = {"failuremode": "failure_mode", "structuralcause": "structural_cause", "suggestedaction": "suggested_action"}


def parse_plan(text: str, table: FailureModeTable = DEFAULT_TABLE) -> RefinementPlan:
    """Strict parse of a planner reply, JSON or ``Field: value`` lines."""
    fields: dict[str, str] = {}
    try:
        obj = extract_json(text)
    except LinkageParseError:
        obj = None
    if isinstance(obj, dict) and "failure_mode" in obj:
        fields = {k: str(obj.get(k, "")) for k in ("failure_mode", "structural_cause", "suggested_action")}
    else:
        for m in _FIELD.finditer(text):
            fields.setdefault(_FIELD_NAMES[_key(m.group(1))], m.group(2).strip())
    if "failure_mode" not in fields:
        raise PlanParseError("reply has no failure mode")
    raw = fields["failure_mode"].strip().strip("`*\"'")
    if raw.startswith("<"):
        raise PlanParseError(f"placeholder instead of a failure mode: {raw!r}")
    mode = parse_mode(raw)
    action = fields.get("suggested_action", "").strip()
    return RefinementPlan(
        mode,
        fields.get("structural_cause", "").strip(),
        action,
        table.resolve(mode),
        table.matches(mode, action),
    )


def plan_json(mode: FailureMode, cause: str, action: str) -> str:
    return json.dumps({"failure_mode": mode.value, "structural_cause": cause, "suggested_action": action})
