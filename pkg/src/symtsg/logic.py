"""Property language: zero-sum coalition operators and a two-coalition Nash operator.

Concrete syntax::

    <<p1,p2>> Pmax=? [ F "goal" ]
    <<p1>> P>=0.9 [ "a" U<=5 "b" ]
    <<p1>> R{"time"}min=? [ F "done" ]
    <<p1:p2>> max=? ( P[ F "g1" ] + P[ F "g2" ] )

Labels are quoted. ``G phi`` is stored as ``F !phi`` with a negation marker
and the threshold (or optimisation direction) inverted, so the checker only
ever sees until formulas.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Union

__all__ = [
    "And",
    "Atom",
    "Bound",
    "Context",
    "Cumulative",
    "FalseF",
    "Instant",
    "Nash",
    "Next",
    "Not",
    "Objective",
    "Or",
    "PropertyError",
    "ReachReward",
    "TrueF",
    "Until",
    "ZeroSumP",
    "ZeroSumR",
    "dualize",
    "parse_properties",
    "parse_property",
    "pretty",
]


class PropertyError(ValueError):
    """Malformed or unsupported property."""


@dataclass(frozen=True)
class Context:
    players: tuple[str, ...]
    labels: frozenset[str] = frozenset()
    rewards: tuple[str, ...] = ()

    @classmethod
    def of(cls, game) -> Context:
        """Context for an explicit or symbolic game."""
        labels = getattr(game, "labels", None)
        if labels is None or not isinstance(labels, dict) or (labels and not isinstance(next(iter(labels.values())), frozenset)):
            labels = getattr(game, "label_bdds", labels or {})
        rewards = getattr(game, "rewards", None)
        if not isinstance(rewards, dict):
            rewards = getattr(game, "reward_mtbdds", {})
        return cls(tuple(game.players), frozenset(labels), tuple(rewards))


# ----------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    arg: StateFormula


@dataclass(frozen=True)
class And:
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class Or:
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class Bound:
    op: str  # <, <=, >=, >
    value: float

    def holds(self, x: float) -> bool:
        v = self.value
        return {"<": x < v, "<=": x <= v, ">=": x >= v, ">": x > v}[self.op]


@dataclass(frozen=True)
class Next:
    arg: StateFormula


@dataclass(frozen=True)
class Until:
    """``left U<=k right``; ``negated`` marks a G formula stored as ``F !phi``."""

    left: StateFormula
    right: StateFormula
    k: int | None = None
    negated: bool = False


PathFormula = Union[Next, Until]


@dataclass(frozen=True)
class Instant:
    k: int


@dataclass(frozen=True)
class Cumulative:
    k: int


@dataclass(frozen=True)
class ReachReward:
    target: StateFormula


RewardFormula = Union[Instant, Cumulative, ReachReward]


@dataclass(frozen=True)
class ZeroSumP:
    coalition: tuple[str, ...]
    path: PathFormula
    bound: Bound | None = None
    opt: str | None = None  # "max" / "min" for numeric queries


@dataclass(frozen=True)
class ZeroSumR:
    coalition: tuple[str, ...]
    reward: str
    formula: RewardFormula
    bound: Bound | None = None
    opt: str | None = None


@dataclass(frozen=True)
class Objective:
    """One summand of a Nash query: ``P[path]`` or ``R{"r"}[rho]``."""

    kind: str  # "P" or "R"
    formula: Union[PathFormula, RewardFormula]
    reward: str | None = None


@dataclass(frozen=True)
class Nash:
    coalitions: tuple[tuple[str, ...], ...]
    opt: str  # "max" (social welfare) or "min" (social cost)
    objectives: tuple[Objective, ...]
    bound: Bound | None = None


StateFormula = Union[TrueF, FalseF, Atom, Not, And, Or, ZeroSumP, ZeroSumR, Nash]

_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}


def _one_minus(v: float) -> float:
    return float(Decimal(1) - Decimal(repr(v)))


# ----------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<str>"[^"\n]*")
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><<|>>|=\?|<=|>=|=>|[<>\[\](){}!&|+,:=])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PropertyError(f"col {pos + 1}: unexpected character {text[pos]!r}")
        if m.lastgroup == "name" and m.group() in ("Pmax", "Pmin", "Rmax", "Rmin"):
            out.append(_Tok("name", m.group()[0], pos + 1))
            out.append(_Tok("name", m.group()[1:], pos + 2))
        elif m.lastgroup != "ws":
            out.append(_Tok(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    out.append(_Tok("eof", "", pos + 1))
    return out


class _Parser:
    def __init__(self, text: str, ctx: Context | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.ctx = ctx

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise PropertyError(f"col {t.col}: {msg}, found {found}")

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "name")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.error(f"expected {text!r}")

    def number(self) -> float:
        t = self.tok
        if t.kind != "num":
            self.error("expected a number")
        self.i += 1
        return float(t.text)

    def integer(self) -> int:
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            self.error("expected a step bound (non-negative integer)")
        self.i += 1
        return int(t.text)

    # -- state formulas ------------------------------------------------
    def state(self) -> StateFormula:
        left = self.disj()
        if self.accept("=>"):
            return Or(Not(left), self.state())
        return left

    def disj(self) -> StateFormula:
        left = self.conj()
        while self.accept("|"):
            left = Or(left, self.conj())
        return left

    def conj(self) -> StateFormula:
        left = self.unary()
        while self.accept("&"):
            left = And(left, self.unary())
        return left

    def unary(self) -> StateFormula:
        if self.accept("!"):
            return Not(self.unary())
        return self.atom()

    def atom(self) -> StateFormula:
        t = self.tok
        if t.kind == "str":
            self.i += 1
            name = t.text[1:-1]
            if self.ctx is not None and name not in self.ctx.labels and name != "init":
                raise PropertyError(f"col {t.col}: unknown label {name!r}")
            return Atom(name)
        if self.accept("true"):
            return TrueF()
        if self.accept("false"):
            return FalseF()
        if self.accept("("):
            f = self.state()
            self.expect(")")
            return f
        if self.at("<<"):
            return self.coalition_op()
        self.error("expected a state formula")

    def coalition_list(self) -> list[tuple[str, ...]]:
        self.expect("<<")
        groups: list[list[str]] = [[]]
        if not self.at(">>"):
            while True:
                t = self.tok
                if t.kind != "name":
                    self.error("expected a player name")
                self.i += 1
                groups[-1].append(t.text)
                if self.accept(","):
                    continue
                if self.accept(":"):
                    groups.append([])
                    continue
                break
        self.expect(">>")
        out = []
        for g in groups:
            for p in g:
                if self.ctx is not None and p not in self.ctx.players:
                    raise PropertyError(f"unknown player {p!r}")
            out.append(self._canonical(g))
        return out

    def _canonical(self, names: Iterable[str]) -> tuple[str, ...]:
        names = list(dict.fromkeys(names))
        if self.ctx is not None:
            return tuple(p for p in self.ctx.players if p in names)
        return tuple(names)

    def coalition_op(self) -> StateFormula:
        groups = self.coalition_list()
        if len(groups) > 1:
            return self.nash(groups)
        coalition = groups[0]
        if self.accept("P"):
            bound, opt = self.bound_or_query("P")
            self.expect("[")
            path = self.path()
            self.expect("]")
            return self._finish_p(coalition, path, bound, opt)
        if self.accept("R"):
            reward = self.reward_name()
            bound, opt = self.bound_or_query("R")
            self.expect("[")
            rho = self.reward_formula()
            self.expect("]")
            return ZeroSumR(coalition, reward, rho, bound, opt)
        self.error("expected P or R after the coalition")

    def _finish_p(self, coalition, path, bound, opt) -> ZeroSumP:
        if isinstance(path, _Globally):
            inner = Until(TrueF(), Not(path.arg), path.k, negated=True)
            if bound is not None:
                bound = Bound(_FLIP[bound.op], _one_minus(bound.value))
            if opt is not None:
                opt = "min" if opt == "max" else "max"
            return ZeroSumP(coalition, inner, bound, opt)
        return ZeroSumP(coalition, path, bound, opt)

    def reward_name(self) -> str:
        if self.accept("{"):
            t = self.tok
            if t.kind != "str":
                self.error("expected a quoted reward structure name")
            self.i += 1
            self.expect("}")
            name = t.text[1:-1]
            if self.ctx is not None and name not in self.ctx.rewards:
                raise PropertyError(f"col {t.col}: unknown reward structure {name!r}")
            return name
        if self.ctx is not None:
            if not self.ctx.rewards:
                raise PropertyError("model has no reward structure")
            return self.ctx.rewards[0]
        raise PropertyError("reward structure name required without a model context")

    def bound_or_query(self, kind: str) -> tuple[Bound | None, str | None]:
        for opt in ("max", "min"):
            if self.accept(opt):
                if self.accept("=?"):
                    return None, opt
                # <<C>> Pmax>=p is not part of the zero-sum grammar
                self.error("expected '=?'")
        t = self.tok
        for op in ("<=", ">=", "<", ">"):
            if self.accept(op):
                v = self.number()
                if kind == "P" and not 0.0 <= v <= 1.0:
                    raise PropertyError(f"col {t.col}: probability threshold {v} outside [0, 1]")
                if v < 0:
                    raise PropertyError(f"col {t.col}: reward threshold {v} is negative")
                return Bound(op, v), None
        self.error("expected max=?, min=? or a threshold")

    # -- path and reward formulas -------------------------------------
    def step_bound(self) -> int | None:
        if self.accept("<="):
            return self.integer()
        if self.accept("<"):
            return self.integer() - 1
        return None

    def path(self):
        if self.accept("X"):
            return Next(self.unary())
        if self.accept("F"):
            k = self.step_bound()
            return Until(TrueF(), self.unary(), k)
        if self.accept("G"):
            k = self.step_bound()
            return _Globally(self.unary(), k)
        left = self.unary()
        if not self.accept("U"):
            self.error("expected X, F, G or U")
        k = self.step_bound()
        return Until(left, self.unary(), k)

    def reward_formula(self):
        if self.accept("I"):
            self.expect("=")
            return Instant(self.integer())
        if self.accept("C"):
            self.expect("<=")
            return Cumulative(self.integer())
        if self.accept("F"):
            return ReachReward(self.unary())
        self.error("expected I=k, C<=k or F")

    # -- Nash ----------------------------------------------------------
    def nash(self, groups: list[tuple[str, ...]]) -> Nash:
        if len(groups) > 2:
            raise PropertyError(f"Nash operators over {len(groups)} coalitions are not supported (at most 2)")
        flat = [p for g in groups for p in g]
        if any(not g for g in groups) or len(set(flat)) != len(flat):
            raise PropertyError("Nash coalitions must be non-empty and pairwise disjoint")
        if self.ctx is not None and set(flat) != set(self.ctx.players):
            raise PropertyError("Nash coalitions must cover every player")
        opt = None
        bound = None
        for o in ("max", "min"):
            if self.accept(o):
                opt = o
        if opt is None:
            self.error("expected max or min")
        if not self.accept("=?"):
            t = self.tok
            for op in ("<=", ">=", "<", ">"):
                if self.accept(op):
                    v = self.number()
                    if v < 0:
                        raise PropertyError(f"col {t.col}: threshold {v} is negative")
                    bound = Bound(op, v)
                    break
            else:
                self.error("expected '=?' or a threshold")
        self.expect("(")
        objs = [self.objective()]
        while self.accept("+"):
            objs.append(self.objective())
        self.expect(")")
        if len(objs) != len(groups):
            raise PropertyError(f"{len(groups)} coalitions but {len(objs)} objectives")
        if len({o.kind for o in objs}) != 1:
            raise PropertyError("Nash objectives must be all P or all R")
        return Nash(tuple(groups), opt, tuple(objs), bound)

    def objective(self) -> Objective:
        if self.accept("P"):
            self.expect("[")
            path = self.path()
            self.expect("]")
            if isinstance(path, _Globally):
                path = Until(TrueF(), Not(path.arg), path.k, negated=True)
            return Objective("P", path)
        if self.accept("R"):
            name = self.reward_name()
            self.expect("[")
            rho = self.reward_formula()
            self.expect("]")
            return Objective("R", rho, name)
        self.error("expected P[...] or R{...}[...]")


@dataclass(frozen=True)
class _Globally:
    arg: StateFormula
    k: int | None


def parse_property(text: str, context: Context | None = None) -> StateFormula:
    """Parse one property; with a context, names are checked and coalitions ordered."""
    p = _Parser(text, context)
    f = p.state()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return f


def parse_properties(text: str, context: Context | None = None) -> list[tuple[str | None, str, StateFormula | PropertyError]]:
    """Parse a property file: ``(name, source, formula-or-error)`` per property.

    Errors are returned in place so that one bad line does not stop the rest.
    """
    out = []
    for line in text.splitlines():
        src = line.split("//", 1)[0].strip()
        if not src:
            continue
        name = None
        m = re.match(r'^"([^"]+)"\s*:\s*(.*)$', src)
        if m:
            name, src = m.group(1), m.group(2)
        try:
            out.append((name, src, parse_property(src, context)))
        except PropertyError as exc:
            out.append((name, src, exc))
    return out


# ----------------------------------------------------------------------
# printing

_SPREC = {Or: 1, And: 2, Not: 3}


def _sp(f) -> int:
    return _SPREC.get(type(f), 4)


def _state(f, need: int = 0) -> str:
    if isinstance(f, TrueF):
        s = "true"
    elif isinstance(f, FalseF):
        s = "false"
    elif isinstance(f, Atom):
        s = f'"{f.name}"'
    elif isinstance(f, Not):
        s = "!" + _state(f.arg, 3)
    elif isinstance(f, And):
        s = f"{_state(f.left, 2)} & {_state(f.right, 3)}"
    elif isinstance(f, Or):
        s = f"{_state(f.left, 1)} | {_state(f.right, 2)}"
    elif isinstance(f, ZeroSumP):
        s = _zero_sum_p(f)
    elif isinstance(f, ZeroSumR):
        s = f"<<{','.join(f.coalition)}>> R{{\"{f.reward}\"}}{_query(f.bound, f.opt)} [ {_reward(f.formula)} ]"
    elif isinstance(f, Nash):
        head = ":".join(",".join(g) for g in f.coalitions)
        q = "=?" if f.bound is None else f"{f.bound.op}{f.bound.value!r}"
        objs = " + ".join(_objective(o) for o in f.objectives)
        s = f"<<{head}>> {f.opt}{q} ( {objs} )"
    else:
        raise TypeError(f"not a state formula: {f!r}")
    if isinstance(f, (ZeroSumP, ZeroSumR, Nash)) and need > 0:
        return f"({s})"
    return f"({s})" if _sp(f) < need else s


def _query(bound: Bound | None, opt: str | None) -> str:
    if bound is None:
        return f"{opt}=?"
    return f"{bound.op}{bound.value!r}"


def _kbound(k: int | None) -> str:
    return "" if k is None else f"<={k}"


def _path(p) -> str:
    if isinstance(p, Next):
        return f"X {_state(p.arg, 3)}"
    if p.negated:
        return f"G{_kbound(p.k)} {_state(p.right.arg, 3)}"
    if isinstance(p.left, TrueF):
        return f"F{_kbound(p.k)} {_state(p.right, 3)}"
    return f"{_state(p.left, 3)} U{_kbound(p.k)} {_state(p.right, 3)}"


def _reward(r) -> str:
    if isinstance(r, Instant):
        return f"I={r.k}"
    if isinstance(r, Cumulative):
        return f"C<={r.k}"
    return f"F {_state(r.target, 3)}"


def _objective(o: Objective) -> str:
    if o.kind == "P":
        return f"P[ {_path(o.formula)} ]"
    return f"R{{\"{o.reward}\"}}[ {_reward(o.formula)} ]"


def _zero_sum_p(f: ZeroSumP) -> str:
    bound, opt = f.bound, f.opt
    if isinstance(f.path, Until) and f.path.negated:
        if bound is not None:
            bound = Bound(_FLIP[bound.op], _one_minus(bound.value))
        if opt is not None:
            opt = "min" if opt == "max" else "max"
    return f"<<{','.join(f.coalition)}>> P{_query(bound, opt)} [ {_path(f.path)} ]"


def pretty(f: StateFormula) -> str:
    """Concrete syntax for ``f``; parsing it yields an equal formula."""
    return _state(f)


# ----------------------------------------------------------------------


def dualize(f: StateFormula, players: Sequence[str]) -> StateFormula:
    """Swap coalition and complement and flip min/max (numeric zero-sum only)."""
    if not isinstance(f, (ZeroSumP, ZeroSumR)) or f.opt is None:
        raise PropertyError("only numeric zero-sum formulas have a determinacy dual")
    rest = tuple(p for p in players if p not in f.coalition)
    return replace(f, coalition=rest, opt="min" if f.opt == "max" else "max")
