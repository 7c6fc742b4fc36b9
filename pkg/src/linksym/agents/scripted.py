"""Deterministic rule set standing in for a language model.

The rules read the numeric evidence the pipeline puts into each prompt and
answer with fixed text or with a mechanical edit of the current linkage.
"""
from __future__ import annotations

import re
from dataclasses import replace
from typing import Optional

import numpy as np

from ..linkage import (
    Branch,
    Fixed,
    Linkage,
    LinkageError,
    Revolute,
    canned_linkages,
    dof,
    parents_of,
    simulate,
    validate,
)
from .backends import Rule, ScriptedBackend
from .planning import FailureMode, plan_json
from .roles import current_linkage, report_value

SIM_STEPS = 60


def _fresh_id(linkage: Linkage, base: str) -> str:
    taken = set(linkage.ids)
    if base not in taken:
        return base
    k = 2
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def _ancestors(linkage: Linkage, jid: str) -> tuple:
    """Joints needed to place ``jid``, in linkage order."""
    need: set[str] = set()
    stack = [jid]
    while stack:
        k = stack.pop()
        if k not in need:
            need.add(k)
            stack.extend(parents_of(linkage.joint(k)))
    return tuple(j for j in linkage.joints if j.id in need)


def _path(linkage: Linkage, joint_id: str) -> Optional[np.ndarray]:
    try:
        sim = simulate(linkage, SIM_STEPS)
    except LinkageError:
        return None
    return sim.per_joint[joint_id].samples if sim.buildable else None


def _position(linkage: Linkage, jid: str) -> Optional[np.ndarray]:
    """Path of one joint, simulated on the sub-mechanism that carries it."""
    j = linkage.joint(jid)
    if isinstance(j, Fixed):
        return np.tile([j.x, j.y], (SIM_STEPS + 1, 1))
    return _path(Linkage(linkage.name, _ancestors(linkage, jid), jid), jid)


def _span_dists(linkage: Linkage, a: str, b: str) -> Optional[float]:
    """Arm length that lets a dyad on ``a`` and ``b`` close at every phase."""
    pa, pb = _position(linkage, a), _position(linkage, b)
    if pa is None or pb is None:
        return None
    d = np.hypot(*(pa - pb).T)
    return float(0.6 * d.max()) if d.max() > 0 else None


def repair_joint(linkage: Linkage, joint_id: str) -> Optional[Linkage]:
    j = linkage.joint(joint_id)
    if not isinstance(j, Revolute):
        return None
    r = _span_dists(linkage, j.parent0, j.parent1)
    if r is None:
        return None
    return linkage.replace_joint(replace(j, dist0=r, dist1=r))


def _ok(linkage: Linkage) -> bool:
    if validate(linkage) or dof(linkage) != 1:
        return False
    return _path(linkage, linkage.target) is not None


def remove_redundancy(linkage: Linkage) -> Optional[Linkage]:
    """Hang a dyad off a new coupler point instead of a shared pin."""
    joints = list(linkage.joints)
    for idx in range(len(joints) - 1, -1, -1):
        x = joints[idx]
        if not isinstance(x, Revolute):
            continue
        for slot in ("parent0", "parent1"):
            p = linkage.joint(getattr(x, slot))
            if not isinstance(p, Revolute):
                continue
            new_id = _fresh_id(linkage, f"{p.id}p")
            point = Revolute(new_id, p.parent0, p.id, 1.5, 2.0, Branch.POSITIVE)
            pos = linkage.ids.index(p.id) + 1
            edited = joints[:pos] + [point] + joints[pos:]
            edited = [replace(j, **{slot: new_id}) if j.id == x.id else j for j in edited]
            cand = replace(linkage, joints=tuple(edited))
            if validate(cand) or dof(cand) != 1:
                continue
            fixed = repair_joint(cand, x.id)
            if fixed is not None and _ok(fixed):
                return fixed
    return None


def add_loop(linkage: Linkage) -> Optional[Linkage]:
    """Tie the effector to a new ground pivot through a dyad."""
    eff = linkage.target
    path = _path(linkage, eff)
    if path is None:
        return None
    c = path.mean(axis=0)
    ext = float(np.ptp(path, axis=0).max()) or 1.0
    h_id = _fresh_id(linkage, "H")
    g_id = _fresh_id(linkage, "G")
    h = Fixed(h_id, float(c[0] + 1.5 * ext + 1.0), float(c[1]))
    d = np.hypot(*(path - [h.x, h.y]).T)
    r = float(0.6 * d.max())
    out = replace(linkage, joints=linkage.joints + (h, Revolute(g_id, eff, h_id, r, r, Branch.POSITIVE)), target=g_id)
    return out if _ok(out) else None


def adjust_lengths(linkage: Linkage, factor: float = 1.1) -> Optional[Linkage]:
    eff = linkage.joint(linkage.target)
    if not isinstance(eff, Revolute):
        return None
    for f in (factor, 1.0 / factor):
        out = linkage.replace_joint(replace(eff, dist0=eff.dist0 * f))
        if _ok(out):
            return out
    return None


def repair_infeasible(linkage: Linkage) -> Optional[Linkage]:
    try:
        sim = simulate(linkage, SIM_STEPS)
    except LinkageError:
        return None
    bad = [d.joint for d in sim.diagnostics if d.joint]
    for jid in bad:
        out = repair_joint(linkage, jid)
        if out is not None and _ok(out):
            return out
    return None


# decisions shared by the planner rule and the planner-free refiner


def diagnose(text: str) -> tuple[FailureMode, str, str]:
    buildable = report_value(text, "buildable")
    dof_s = report_value(text, "dof")
    links = report_value(text, "links")
    if buildable == "no":
        return (
            FailureMode.OVERCONSTRAINT,
            "a joint definition cannot be satisfied over the crank cycle",
            "remove the conflicting joint constraint so the mechanism assembles",
        )
    if dof_s is not None and dof_s != "1":
        return (
            FailureMode.OVERCONSTRAINT,
            "a dyad hangs on an already shared pin and forms a redundant loop",
            "remove the redundant link to restore single-DOF mobility",
        )
    if links == "4" and "SPEC_SATISFIED no" in text:
        return (
            FailureMode.UNDERCONSTRAINT,
            "a single coupler loop cannot produce the required path features",
            "add a loop with a sixth link and a new ground pivot",
        )
    return (
        FailureMode.KINEMATIC_INACCURACY,
        "link proportions limit how closely the coupler path follows the target",
        "adjust link lengths of the effector dyad",
    )


def edit_for(mode: FailureMode, linkage: Linkage) -> Optional[Linkage]:
    if mode is FailureMode.OVERCONSTRAINT:
        if not validate(linkage) and dof(linkage) != 1:
            return remove_redundancy(linkage)
        return repair_infeasible(linkage)
    if mode is FailureMode.UNDERCONSTRAINT:
        return add_loop(linkage)
    return adjust_lengths(linkage)


_MODE_LINE = re.compile(r"^Failure Mode:\s*(\w+)", re.M)


def _refiner(text: str, _m) -> str:
    lk = current_linkage(text)
    found = _MODE_LINE.search(text)
    mode = FailureMode(found.group(1)) if found else diagnose(text)[0]
    out = edit_for(mode, lk)
    if out is None:
        out = lk
    return "Edited linkage:\n" + out.to_json(indent=2)


def _critic(text: str, _m) -> str:
    buildable = report_value(text, "buildable")
    dof_s = report_value(text, "dof")
    lines = []
    lines.append("Kinematic Accuracy: the coupler path is compared after rigid alignment.")
    if buildable == "no":
        lines.append("Mobility/DOF: the mechanism does not assemble over the full crank cycle.")
        lines.append("Compositionality: no trajectory, so no temporal predicates.")
        lines.append("Recommendation: make every joint definition satisfiable.")
    elif dof_s not in (None, "1"):
        lines.append("Mobility/DOF: mobility exceeds one; a redundant loop shares a pin.")
        lines.append("Compositionality: motion is not uniquely determined by the crank.")
        lines.append("Recommendation: remove the redundant link.")
    else:
        lines.append("Mobility/DOF: single input, fully determined motion.")
        sat = "SPEC_SATISFIED yes" in text
        lines.append(f"Compositionality: the temporal specification is {'met' if sat else 'not met'}.")
        lines.append("Recommendation: refine the structure toward the missing path features.")
    return "\n".join(lines)


def _planner(text: str, _m) -> str:
    return plan_json(*diagnose(text))


def _topology(linkage: Linkage) -> str:
    return "Proposed mechanism.\n" + linkage.to_json(indent=2)


def default_rules() -> list[Rule]:
    canned = canned_linkages()
    return [
        Rule("topology", r"INTENT:[^\n]*\bellipse\b", _topology(canned["six-link-six-joint"])),
        Rule("topology", r"INTENT:", _topology(canned["four-bar"])),
        Rule("critic", r".", _critic),
        Rule("planner", r".", _planner),
        Rule("refiner", r"CURRENT LINKAGE:", _refiner),
    ]


def scripted_backend() -> ScriptedBackend:
    return ScriptedBackend(default_rules(), name="scripted")
