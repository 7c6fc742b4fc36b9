from __future__ import annotations

from dataclasses import dataclass

from ..linkage import Branch, Crank, Fixed, Linkage, Revolute, dof, validate
from .space import ParamSpace, ParamSpec


@dataclass(frozen=True)
class Template:
    name: str
    linkage: Linkage
    space: ParamSpace


def _four_bar_joints():
    return (
        Fixed("A", 0.0, 0.0),
        Fixed("D", 3.0, 0.0),
        Crank("B", "A", 1.0, 0.0),
        Revolute("C", "B", "D", 3.0, 2.5, Branch.POSITIVE),
        Revolute("E", "B", "C", 1.5, 2.0, Branch.POSITIVE),
    )


def _lengths(pairs) -> ParamSpace:
    return ParamSpace(tuple(ParamSpec(pid, lo, hi) for pid, lo, hi in pairs))


FOUR_BAR_BOUNDS = [
    ("B.radius", 0.4, 1.6),
    ("C.dist0", 2.0, 4.0),
    ("C.dist1", 1.5, 3.5),
    ("E.dist0", 0.5, 3.0),
    ("E.dist1", 0.5, 3.0),
]


def four_bar() -> Template:
    lk = Linkage("four-bar", _four_bar_joints(), target="E", intent="four-bar coupler point")
    return Template("four-bar", lk, _lengths(FOUR_BAR_BOUNDS))


def watt_six_bar() -> Template:
    """Coupler point and rocker point joined by a dyad (adjacent ternary links)."""
    joints = _four_bar_joints() + (
        Revolute("R", "C", "D", 1.5, 1.5, Branch.POSITIVE),
        Revolute("G", "E", "R", 2.5, 2.0, Branch.POSITIVE),
    )
    lk = Linkage("watt-six-bar", joints, target="G", intent="Watt chain")
    bounds = FOUR_BAR_BOUNDS + [("R.dist0", 0.8, 2.5), ("G.dist0", 1.0, 4.0), ("G.dist1", 1.0, 4.0)]
    return Template("watt-six-bar", lk, _lengths(bounds))


def stephenson_six_bar() -> Template:
    """Coupler point tied to a second ground pivot through a dyad."""
    joints = _four_bar_joints() + (
        Fixed("H", 6.0, 0.0),
        Revolute("G", "E", "H", 4.0, 4.0, Branch.POSITIVE),
    )
    lk = Linkage("stephenson-six-bar", joints, target="G", intent="Stephenson chain")
    bounds = FOUR_BAR_BOUNDS + [("G.dist0", 2.5, 5.5), ("G.dist1", 2.5, 5.5)]
    return Template("stephenson-six-bar", lk, _lengths(bounds))


def enumerate_topologies(n_bars: int) -> list[Template]:
    if n_bars == 4:
        out = [four_bar()]
    elif n_bars == 6:
        out = [watt_six_bar(), stephenson_six_bar()]
    else:
        raise ValueError(f"unsupported bar count {n_bars}; expected 4 or 6")
    for t in out:
        assert not validate(t.linkage) and dof(t.linkage) == 1, t.name
        t.space.check(t.linkage)
    return out
