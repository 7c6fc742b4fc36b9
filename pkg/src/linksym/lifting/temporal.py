"""Bounded temporal formulas over normalized sample time.

A formula is evaluated at every sample ``k`` with time ``t_k = k/N``;
interval bounds are relative to ``t_k``. The value of a formula for a whole
trace is its value at ``k = 0``, so top-level windows are absolute.
``phi U[a,b] psi`` holds at ``k`` when some sample ``j`` with ``t_j`` in
``[t_k+a, t_k+b]`` satisfies ``psi`` and ``phi`` holds at every sample from
``k`` through ``j``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from ..linkage import Trajectory
from .config import LiftingConfig
from .events import Event, EventKind
from .geometry import Guard, Region
from .proxies import proxies as compute_proxies

WINDOW_TOL = 1e-12
EVENT_ATOMS = ("INF", "EX_x", "EX_y", "SINT")


def _check_interval(a: float, b: float) -> None:
    if not (0.0 <= a <= b <= 1.0):
        raise ValueError(f"malformed interval [{a}, {b}]")


@dataclass(frozen=True)
class In:
    region: str


@dataclass(frozen=True)
class Cross:
    guard: str


@dataclass(frozen=True)
class CurvZero:
    pass


@dataclass(frozen=True)
class EventAtom:
    kind: str

    def __post_init__(self):
        if self.kind not in EVENT_ATOMS:
            raise ValueError(f"unknown event atom {self.kind!r}")


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("And needs at least two operands")


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("Or needs at least two operands")


@dataclass(frozen=True)
class F:
    a: float
    b: float
    arg: "Formula"

    def __post_init__(self):
        _check_interval(self.a, self.b)


@dataclass(frozen=True)
class G:
    a: float
    b: float
    arg: "Formula"

    def __post_init__(self):
        _check_interval(self.a, self.b)


@dataclass(frozen=True)
class U:
    a: float
    b: float
    left: "Formula"
    right: "Formula"

    def __post_init__(self):
        _check_interval(self.a, self.b)


Formula = Union[In, Cross, CurvZero, EventAtom, Not, And, Or, F, G, U]


def conjunction(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        raise ValueError("empty conjunction")
    return parts[0] if len(parts) == 1 else And(parts)


def conjuncts(formula: Formula) -> tuple[Formula, ...]:
    return formula.args if isinstance(formula, And) else (formula,)


def depth(formula: Formula) -> int:
    if isinstance(formula, (In, Cross, CurvZero, EventAtom)):
        return 0
    if isinstance(formula, (Not, F, G)):
        return 1 + depth(formula.arg)
    if isinstance(formula, U):
        return 1 + max(depth(formula.left), depth(formula.right))
    return 1 + max(depth(x) for x in formula.args)


# text form


def fmt_time(x: float) -> str:
    # two decimals when exact, a few more when that absorbs float noise
    for digits in range(2, 7):
        s = f"{x:.{digits}f}"
        if abs(float(s) - x) <= 1e-12:
            return s
    return repr(float(x))


def to_text(formula: Formula) -> str:
    if isinstance(formula, In):
        return f"in({formula.region})"
    if isinstance(formula, Cross):
        return f"cross({formula.guard})"
    if isinstance(formula, CurvZero):
        return "curv=0"
    if isinstance(formula, EventAtom):
        return formula.kind
    if isinstance(formula, Not):
        inner = to_text(formula.arg)
        return f"¬({inner})" if isinstance(formula.arg, (And, Or)) else f"¬{inner}"
    if isinstance(formula, (F, G)):
        op = "F" if isinstance(formula, F) else "G"
        return f"{op}_[{fmt_time(formula.a)},{fmt_time(formula.b)}]({to_text(formula.arg)})"
    if isinstance(formula, U):

        def side(x):
            return f"({to_text(x)})" if isinstance(x, (And, Or)) else to_text(x)

        return f"({side(formula.left)} U_[{fmt_time(formula.a)},{fmt_time(formula.b)}] {side(formula.right)})"
    if isinstance(formula, And):
        return " ∧ ".join(f"({to_text(x)})" if isinstance(x, Or) else to_text(x) for x in formula.args)
    return " | ".join(f"({to_text(x)})" if isinstance(x, And) else to_text(x) for x in formula.args)


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<op>[FGU])_\[\s*(?P<a>[-+0-9.eE]+)\s*,\s*(?P<b>[-+0-9.eE]+)\s*\]"
    r"|(?P<in>in)\(\s*(?P<rid>[A-Za-z0-9_.\-]+)\s*\)"
    r"|(?P<cross>cross)\(\s*(?P<gid>[A-Za-z0-9_.\-]+)\s*\)"
    r"|(?P<curv>curv\s*=\s*0)"
    r"|(?P<ev>INF|EX_x|EX_y|SINT)\b"
    r"|(?P<sym>[()¬!∧&|∨])"
    r")"
)


def _tokenize(text: str) -> list[tuple]:
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse formula at {text[pos:pos + 20]!r}")
        pos = m.end()
        if m.group("op"):
            out.append(("op", m.group("op"), float(m.group("a")), float(m.group("b"))))
        elif m.group("in"):
            out.append(("atom", In(m.group("rid"))))
        elif m.group("cross"):
            out.append(("atom", Cross(m.group("gid"))))
        elif m.group("curv"):
            out.append(("atom", CurvZero()))
        elif m.group("ev"):
            out.append(("atom", EventAtom(m.group("ev"))))
        else:
            sym = {"!": "¬", "&": "∧", "∨": "|"}.get(m.group("sym"), m.group("sym"))
            out.append(("sym", sym))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of formula")
        self.i += 1
        return tok

    def expect(self, sym):
        tok = self.take()
        if tok != ("sym", sym):
            raise ValueError(f"expected {sym!r}, got {tok!r}")

    def disjunction(self):
        parts = [self.conj()]
        while self.peek() == ("sym", "|"):
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self):
        parts = [self.until()]
        while self.peek() == ("sym", "∧"):
            self.take()
            parts.append(self.until())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def until(self):
        left = self.unary()
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == "U":
            self.take()
            return U(tok[2], tok[3], left, self.unary())
        return left

    def unary(self):
        tok = self.take()
        if tok == ("sym", "¬"):
            return Not(self.unary())
        if tok[0] == "op":
            if tok[1] == "U":
                raise ValueError("U needs a left operand")
            cls = F if tok[1] == "F" else G
            return cls(tok[2], tok[3], self.unary())
        if tok[0] == "atom":
            return tok[1]
        if tok == ("sym", "("):
            inner = self.disjunction()
            self.expect(")")
            return inner
        raise ValueError(f"unexpected token {tok!r}")


def parse_formula(text: str) -> Formula:
    p = _Parser(_tokenize(text))
    out = p.disjunction()
    if p.peek() is not None:
        raise ValueError(f"trailing input in formula: {p.peek()!r}")
    return out


def formula_to_dict(formula: Formula) -> dict:
    if isinstance(formula, In):
        return {"op": "in", "region": formula.region}
    if isinstance(formula, Cross):
        return {"op": "cross", "guard": formula.guard}
    if isinstance(formula, CurvZero):
        return {"op": "curv=0"}
    if isinstance(formula, EventAtom):
        return {"op": "event", "kind": formula.kind}
    if isinstance(formula, Not):
        return {"op": "not", "arg": formula_to_dict(formula.arg)}
    if isinstance(formula, (And, Or)):
        return {"op": "and" if isinstance(formula, And) else "or", "args": [formula_to_dict(x) for x in formula.args]}
    if isinstance(formula, U):
        return {"op": "U", "a": formula.a, "b": formula.b, "left": formula_to_dict(formula.left), "right": formula_to_dict(formula.right)}
    return {"op": type(formula).__name__, "a": formula.a, "b": formula.b, "arg": formula_to_dict(formula.arg)}


# evaluation


@dataclass(frozen=True, eq=False)
class TraceContext:
    """Per-sample truth of every atom on one trace."""

    times: np.ndarray
    regions: Mapping[str, np.ndarray]
    guards: Mapping[str, np.ndarray]
    curv_zero: np.ndarray
    events: Mapping[str, np.ndarray]

    @property
    def n(self) -> int:
        return self.times.shape[0]


def build_context(
    traj: Trajectory,
    events: Iterable[Event],
    regions: Iterable[Region] = (),
    guards: Iterable[Guard] = (),
    config: LiftingConfig = LiftingConfig(),
    curvatures: np.ndarray | None = None,
) -> TraceContext:
    n = len(traj)
    times = np.arange(n) / (n - 1)
    if curvatures is None:
        curvatures = compute_proxies(traj, config.dt, config.singular_speed).curvatures
    reg = {r.id: r.contains(traj.samples) for r in regions}
    grd = {g.id: np.zeros(n, dtype=bool) for g in guards}
    ev = {k: np.zeros(n, dtype=bool) for k in EVENT_ATOMS}
    for e in events:
        if e.kind is EventKind.GUARD_CROSS:
            if e.payload in grd:
                grd[e.payload][e.index] = True
        elif e.kind.value in ev:
            ev[e.kind.value][e.index] = True
    return TraceContext(times, reg, grd, np.abs(curvatures) <= config.curvature_tol, ev)


def _windows(ctx: TraceContext, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Half-open index ranges [lo_k, hi_k) of samples in [t_k + a, t_k + b]."""
    lo = np.searchsorted(ctx.times, (ctx.times + a) - WINDOW_TOL, side="left")
    hi = np.searchsorted(ctx.times, (ctx.times + b) + WINDOW_TOL, side="right")
    return lo, hi


def _prefix(x: np.ndarray) -> np.ndarray:
    return np.concatenate(([0], np.cumsum(x, dtype=np.int64)))


def satisfaction(formula: Formula, ctx: TraceContext) -> np.ndarray:
    """Boolean truth value of ``formula`` at every sample."""
    if isinstance(formula, In):
        try:
            return ctx.regions[formula.region]
        except KeyError:
            raise ValueError(f"unknown region {formula.region!r}") from None
    if isinstance(formula, Cross):
        try:
            return ctx.guards[formula.guard]
        except KeyError:
            raise ValueError(f"unknown guard {formula.guard!r}") from None
    if isinstance(formula, CurvZero):
        return ctx.curv_zero
    if isinstance(formula, EventAtom):
        return ctx.events[formula.kind]
    if isinstance(formula, Not):
        return ~satisfaction(formula.arg, ctx)
    if isinstance(formula, And):
        return np.logical_and.reduce([satisfaction(x, ctx) for x in formula.args])
    if isinstance(formula, Or):
        return np.logical_or.reduce([satisfaction(x, ctx) for x in formula.args])
    lo, hi = _windows(ctx, formula.a, formula.b)
    if isinstance(formula, F):
        c = _prefix(satisfaction(formula.arg, ctx))
        return c[hi] - c[lo] > 0
    if isinstance(formula, G):
        c = _prefix(satisfaction(formula.arg, ctx))
        return c[hi] - c[lo] == hi - lo
    phi = satisfaction(formula.left, ctx)
    psi = satisfaction(formula.right, ctx)
    # first index >= k where phi fails
    fail = np.full(ctx.n + 1, ctx.n)
    for k in range(ctx.n - 1, -1, -1):
        fail[k] = k if not phi[k] else fail[k + 1]
    top = np.minimum(hi, fail[: ctx.n])
    c = _prefix(psi)
    return (top > lo) & (c[np.maximum(top, lo)] - c[lo] > 0)


def evaluate(
    formula: Formula,
    traj: Trajectory,
    events: Iterable[Event],
    regions: Iterable[Region] = (),
    guards: Iterable[Guard] = (),
    config: LiftingConfig = LiftingConfig(),
) -> bool:
    ctx = build_context(traj, events, regions, guards, config)
    return bool(satisfaction(formula, ctx)[0])
