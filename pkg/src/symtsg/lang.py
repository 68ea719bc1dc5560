"""A compact guarded-command language for turn-based stochastic games.

Example::

    tsg
    player p1 game endplayer
    player p2 endplayer

    module game
      s : [0..2] init 0;
      [a] s=0 -> (s'=0);
      [b] s=0 -> 0.9:(s'=1) + 0.1:(s'=2);
      [a] @p2 s=1 -> 0.1:(s'=1) + 0.9:(s'=2);
      [a] s=2 -> (s'=2);
    endmodule

    label "goal" = s=2;
    rewards "steps" s<2 : 1; endrewards

Players claim modules and action labels. A command belongs to its ``@player``
annotation if present, else to the owner of its label, else to the owner of
its module. Commands sharing a label synchronise across every module that
uses the label; unlabelled commands run alone under a generated action name.

Two builders share one semantics: :func:`build_explicit` enumerates reachable
states, :func:`build_symbolic` composes per-command MTBDDs.
"""

from __future__ import annotations

import math
import re
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Union

from .model import (
    ExplicitTsg,
    ModelError,
    RewardStructure,
    StateVar,
    SymbolicTsg,
    make_manager,
    nbits,
    player_cube_list,
    reachable,
    to_bits,
    variable_blocks,
)
from .mtbdd import Bdd, Manager, Mtbdd, MtbddError

__all__ = [
    "LangError",
    "ModelAst",
    "build_explicit",
    "build_symbolic",
    "load_model",
    "parse_expression",
    "parse_model",
    "pretty",
]

PROB_TOL = 1e-9


class LangError(ModelError):
    """A lexical, syntactic or semantic error in a model source."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None, diagnostics=()):
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message, diagnostics)
        self.line = line
        self.col = col


# ----------------------------------------------------------------------
# lexer

KEYWORDS = {
    "tsg", "player", "endplayer", "const", "int", "double", "bool", "module",
    "endmodule", "label", "rewards", "endrewards", "init", "true", "false",
}
FUNCTIONS = {"min", "max", "mod", "floor", "ceil", "pow"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<num>\d+\.(?!\.)\d*(?:[eE][+-]?\d+)?|\d*\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[^"\n]*")
  | (?P<op>\.\.|->|=>|!=|<=|>=|[\[\](){};:,'=<>+\-*/&|!?@])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, str, op, kw, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise LangError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        col = pos - line_start + 1
        if kind == "ws":
            nl = s.count("\n")
            if nl:
                line += nl
                line_start = pos + s.rfind("\n") + 1
        else:
            if kind == "name" and s in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, s, line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# ----------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: Union[int, float]
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Ident:
    name: str
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    arg: Any
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: Any
    right: Any
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Ite:
    cond: Any
    then: Any
    other: Any
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


Expr = Union[Num, BoolLit, Ident, Unary, Binary, Ite, Call]


@dataclass(frozen=True)
class ConstDecl:
    name: str
    type: str  # int, double, bool
    value: Expr | None
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class VarDecl:
    name: str
    low: Expr | None  # None for bool
    high: Expr | None
    init: Expr | None
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)

    @property
    def is_bool(self) -> bool:
        return self.low is None


@dataclass(frozen=True)
class Update:
    prob: Expr | None  # None means 1
    assignments: tuple[tuple[str, Expr], ...]
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Command:
    action: str | None
    owner: str | None
    guard: Expr
    updates: tuple[Update, ...]
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class ModuleAst:
    name: str
    variables: tuple[VarDecl, ...]
    commands: tuple[Command, ...]
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class PlayerDecl:
    name: str
    modules: tuple[str, ...]
    actions: tuple[str, ...]
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class RewardItem:
    action: str | None  # None: state reward; "" : unlabelled commands
    guard: Expr
    value: Expr
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class RewardsDecl:
    name: str
    items: tuple[RewardItem, ...]
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class LabelDecl:
    name: str
    expr: Expr
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class ModelAst:
    players: tuple[PlayerDecl, ...]
    constants: tuple[ConstDecl, ...]
    modules: tuple[ModuleAst, ...]
    labels: tuple[LabelDecl, ...]
    rewards: tuple[RewardsDecl, ...]


# ----------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise LangError(f"{msg}, found {found}", tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str, what: str | None = None) -> Token:
        t = self.accept(text)
        if t is None:
            self.error(f"expected {what or repr(text)}")
        return t

    def name(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "name":
            self.error(f"expected {what}")
        self.i += 1
        return t

    def string(self) -> Token:
        t = self.tok
        if t.kind != "str":
            self.error("expected a quoted name")
        self.i += 1
        return t

    # -- model ---------------------------------------------------------
    def model(self) -> ModelAst:
        self.expect("tsg", "'tsg' model header")
        players, consts, modules, labels, rewards = [], [], [], [], []
        while self.tok.kind != "eof":
            if self.at("player"):
                players.append(self.player())
            elif self.at("const"):
                consts.append(self.const())
            elif self.at("module"):
                modules.append(self.module())
            elif self.at("label"):
                labels.append(self.label())
            elif self.at("rewards"):
                rewards.append(self.rewards())
            else:
                self.error("expected 'player', 'const', 'module', 'label' or 'rewards'")
        ast = ModelAst(tuple(players), tuple(consts), tuple(modules), tuple(labels), tuple(rewards))
        _check_declarations(ast)
        return ast

    def player(self) -> PlayerDecl:
        start = self.expect("player")
        name = self.name("player name").text
        mods, acts = [], []
        while not self.at("endplayer"):
            if self.accept("["):
                acts.append(self.name("action label").text)
                self.expect("]")
            elif self.tok.kind == "name":
                mods.append(self.name().text)
            else:
                self.error("expected module name, [action] or endplayer")
            if not self.accept(","):
                break
        self.expect("endplayer")
        return PlayerDecl(name, tuple(mods), tuple(acts), (start.line, start.col))

    def const(self) -> ConstDecl:
        start = self.expect("const")
        typ = "auto"
        for t in ("int", "double", "bool"):
            if self.accept(t):
                typ = t
                break
        name = self.name("constant name").text
        value = None
        if self.accept("="):
            value = self.expr()
        self.expect(";")
        return ConstDecl(name, typ, value, (start.line, start.col))

    def module(self) -> ModuleAst:
        start = self.expect("module")
        name = self.name("module name").text
        variables, commands = [], []
        while self.tok.kind == "name" and self.peek().text == ":":
            variables.append(self.vardecl())
        while not self.at("endmodule"):
            if not self.at("["):
                self.error("expected command or endmodule")
            commands.append(self.command())
        self.expect("endmodule")
        if not variables and not commands:
            raise LangError("expected command or endmodule", start.line, start.col)
        return ModuleAst(name, tuple(variables), tuple(commands), (start.line, start.col))

    def vardecl(self) -> VarDecl:
        t = self.name()
        self.expect(":")
        if self.accept("bool"):
            low = high = None
        else:
            self.expect("[", "'[' or 'bool'")
            low = self.expr()
            self.expect("..")
            high = self.expr()
            self.expect("]")
        init = None
        if self.accept("init"):
            init = self.expr()
        self.expect(";")
        return VarDecl(t.text, low, high, init, (t.line, t.col))

    def command(self) -> Command:
        start = self.expect("[")
        action = None
        if self.tok.kind == "name":
            action = self.name().text
        self.expect("]")
        owner = None
        if self.accept("@"):
            owner = self.name("player name").text
        guard = self.expr()
        self.expect("->")
        updates = [self.update()]
        while self.accept("+"):
            updates.append(self.update())
        self.expect(";")
        return Command(action, owner, guard, tuple(updates), (start.line, start.col))

    def _assignment_follows(self) -> bool:
        t0, t1, t2 = self.tok, self.peek(1), self.peek(2)
        if t0.text == "true" and t0.kind == "kw" and self.peek(1).text != ":":
            return True
        return t0.text == "(" and t1.kind == "name" and t2.text == "'"

    def update(self) -> Update:
        start = self.tok
        prob = None
        if not self._assignment_follows():
            prob = self.expr()
            self.expect(":")
        if self.accept("true"):
            return Update(prob, (), (start.line, start.col))
        asg = [self.assignment()]
        while self.accept("&"):
            asg.append(self.assignment())
        return Update(prob, tuple(asg), (start.line, start.col))

    def assignment(self) -> tuple[str, Expr]:
        self.expect("(", "'(' starting an assignment")
        name = self.name("variable").text
        self.expect("'")
        self.expect("=")
        e = self.expr()
        self.expect(")")
        return name, e

    def label(self) -> LabelDecl:
        start = self.expect("label")
        name = self.string().text[1:-1]
        self.expect("=")
        e = self.expr()
        self.expect(";")
        return LabelDecl(name, e, (start.line, start.col))

    def rewards(self) -> RewardsDecl:
        start = self.expect("rewards")
        name = self.string().text[1:-1]
        items = []
        while not self.accept("endrewards"):
            t = self.tok
            action = None
            if self.accept("["):
                action = self.name().text if self.tok.kind == "name" else ""
                self.expect("]")
            guard = self.expr()
            self.expect(":")
            value = self.expr()
            self.expect(";")
            items.append(RewardItem(action, guard, value, (t.line, t.col)))
        return RewardsDecl(name, tuple(items), (start.line, start.col))

    # -- expressions ---------------------------------------------------
    def expr(self) -> Expr:
        c = self.implies()
        t = self.accept("?")
        if t:
            a = self.expr()
            self.expect(":")
            b = self.expr()
            return Ite(c, a, b, (t.line, t.col))
        return c

    def implies(self) -> Expr:
        left = self.disj()
        t = self.accept("=>")
        if t:
            return Binary("=>", left, self.implies(), (t.line, t.col))
        return left

    def disj(self) -> Expr:
        left = self.conj()
        while (t := self.accept("|")) is not None:
            left = Binary("|", left, self.conj(), (t.line, t.col))
        return left

    def conj(self) -> Expr:
        left = self.neg()
        while (t := self.accept("&")) is not None:
            left = Binary("&", left, self.neg(), (t.line, t.col))
        return left

    def neg(self) -> Expr:
        t = self.accept("!")
        if t:
            return Unary("!", self.neg(), (t.line, t.col))
        return self.rel()

    def rel(self) -> Expr:
        left = self.additive()
        for op in ("=", "!=", "<=", ">=", "<", ">"):
            t = self.accept(op)
            if t:
                return Binary(op, left, self.additive(), (t.line, t.col))
        return left

    def additive(self) -> Expr:
        left = self.mult()
        while True:
            t = self.accept("+") or self.accept("-")
            if t is None:
                return left
            left = Binary(t.text, left, self.mult(), (t.line, t.col))

    def mult(self) -> Expr:
        left = self.unary()
        while True:
            t = self.accept("*") or self.accept("/")
            if t is None:
                return left
            left = Binary(t.text, left, self.unary(), (t.line, t.col))

    def unary(self) -> Expr:
        t = self.accept("-")
        if t:
            return Unary("-", self.unary(), (t.line, t.col))
        return self.primary()

    def primary(self) -> Expr:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "num":
            self.i += 1
            text = t.text
            if re.fullmatch(r"\d+", text):
                return Num(int(text), pos)
            return Num(float(text), pos)
        if t.kind == "kw" and t.text in ("true", "false"):
            self.i += 1
            return BoolLit(t.text == "true", pos)
        if t.kind == "name":
            self.i += 1
            if t.text in FUNCTIONS and self.at("("):
                self.expect("(")
                args = [self.expr()]
                while self.accept(","):
                    args.append(self.expr())
                self.expect(")")
                arity = {"floor": 1, "ceil": 1, "mod": 2, "pow": 2}.get(t.text)
                if arity is not None and len(args) != arity:
                    raise LangError(f"{t.text} expects {arity} argument(s)", t.line, t.col)
                if t.text in ("min", "max") and len(args) < 2:
                    raise LangError(f"{t.text} expects at least 2 arguments", t.line, t.col)
                return Call(t.text, tuple(args), pos)
            return Ident(t.text, pos)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected an expression")


def parse_model(text: str) -> ModelAst:
    """Parse model source; errors carry line and column."""
    return _Parser(text).model()


def parse_expression(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return e


def load_model(path) -> ModelAst:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def _check_declarations(ast: ModelAst) -> None:
    seen: dict[str, str] = {}

    def declare(name, kind, pos):
        if name in seen:
            raise LangError(f"duplicate declaration of {kind} {name!r} (already a {seen[name]})", *pos)
        seen[name] = kind

    for c in ast.constants:
        declare(c.name, "constant", c.pos)
    for m in ast.modules:
        declare(m.name, "module", m.pos)
        for v in m.variables:
            declare(v.name, "variable", v.pos)
    pnames = set()
    for p in ast.players:
        if p.name in pnames:
            raise LangError(f"duplicate player {p.name!r}", *p.pos)
        pnames.add(p.name)
    for kind, names in (("label", [l.name for l in ast.labels]), ("reward structure", [r.name for r in ast.rewards])):
        if len(set(names)) != len(names):
            raise LangError(f"duplicate {kind} name")


# ----------------------------------------------------------------------
# pretty printer

_PREC = {"?": 0, "=>": 1, "|": 2, "&": 3, "!": 4, "=": 5, "!=": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
         "+": 6, "-": 6, "*": 7, "/": 7, "neg": 8}


def _prec(e) -> int:
    if isinstance(e, Ite):
        return 0
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _PREC["!"] if e.op == "!" else _PREC["neg"]
    return 9


def pretty_expr(e: Expr) -> str:
    def wrap(sub, need):
        s = pretty_expr(sub)
        return f"({s})" if _prec(sub) < need else s

    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Unary):
        p = _prec(e)
        return f"{e.op}{wrap(e.arg, p)}"
    if isinstance(e, Binary):
        p = _PREC[e.op]
        if e.op == "=>":
            return f"{wrap(e.left, p + 1)} => {wrap(e.right, p)}"
        if p == 5:
            return f"{wrap(e.left, p + 1)} {e.op} {wrap(e.right, p + 1)}"
        return f"{wrap(e.left, p)} {e.op} {wrap(e.right, p + 1)}"
    if isinstance(e, Ite):
        return f"{wrap(e.cond, 1)} ? {wrap(e.then, 0)} : {wrap(e.other, 0)}"
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(pretty_expr(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def pretty(ast: ModelAst) -> str:
    """Source text for ``ast``; parsing it gives back an equal AST."""
    out = ["tsg", ""]
    for p in ast.players:
        items = list(p.modules) + [f"[{a}]" for a in p.actions]
        out.append(" ".join(["player", p.name, ", ".join(items), "endplayer"]).replace("  ", " "))
    if ast.players:
        out.append("")
    for c in ast.constants:
        typ = "" if c.type == "auto" else f"{c.type} "
        val = f" = {pretty_expr(c.value)}" if c.value is not None else ""
        out.append(f"const {typ}{c.name}{val};")
    if ast.constants:
        out.append("")
    for m in ast.modules:
        out.append(f"module {m.name}")
        for v in m.variables:
            rng = "bool" if v.is_bool else f"[{pretty_expr(v.low)}..{pretty_expr(v.high)}]"
            init = f" init {pretty_expr(v.init)}" if v.init is not None else ""
            out.append(f"  {v.name} : {rng}{init};")
        for c in m.commands:
            ups = []
            for u in c.updates:
                body = " & ".join(f"({n}'={pretty_expr(e)})" for n, e in u.assignments) or "true"
                ups.append(body if u.prob is None else f"{pretty_expr(u.prob)}:{body}")
            owner = f" @{c.owner}" if c.owner else ""
            out.append(f"  [{c.action or ''}]{owner} {pretty_expr(c.guard)} -> {' + '.join(ups)};")
        out.append("endmodule")
        out.append("")
    for l in ast.labels:
        out.append(f'label "{l.name}" = {pretty_expr(l.expr)};')
    for r in ast.rewards:
        out.append(f'rewards "{r.name}"')
        for it in r.items:
            act = "" if it.action is None else f"[{it.action}] "
            out.append(f"  {act}{pretty_expr(it.guard)} : {pretty_expr(it.value)};")
        out.append("endrewards")
    return "\n".join(out).rstrip() + "\n"


# ----------------------------------------------------------------------
# semantic resolution shared by both builders


@dataclass
class _Var:
    name: str
    module: str
    low: int
    high: int
    init: int
    is_bool: bool
    index: int  # position in the state tuple


@dataclass
class _Cmd:
    module: str
    action: str  # global action name
    label: str | None  # synchronisation label, None for unlabelled
    owner: int
    guard: Expr
    updates: tuple[Update, ...]
    pos: tuple[int, int]


@dataclass
class _Resolved:
    players: list[str]
    consts: dict[str, Any]
    vars: list[_Var]
    var_by_name: dict[str, _Var]
    modules: list[str]
    module_vars: dict[str, list[_Var]]
    actions: list[str]
    commands: list[_Cmd]
    labels: list[LabelDecl]
    rewards: list[RewardsDecl]
    warnings: list[str]


def _parse_override(name: str, value) -> Any:
    if not isinstance(value, str):
        return value
    v = value.strip()
    if v in ("true", "false"):
        return v == "true"
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        raise LangError(f"override {name}={value!r} is not a number or boolean") from None


def _const_eval(e: Expr, consts: Mapping[str, Any]):
    fn = _compile_py(e, {}, consts)
    try:
        return fn(())
    except ZeroDivisionError:
        raise LangError("division by zero in constant expression", *e.pos) from None


def _resolve(ast: ModelAst, overrides: Mapping[str, Any] | None) -> _Resolved:
    overrides = dict(overrides or {})
    declared = {c.name for c in ast.constants}
    for k in overrides:
        if k not in declared:
            raise LangError(f"override for undeclared constant {k!r}")
    consts: dict[str, Any] = {}
    for c in ast.constants:
        if c.name in overrides:
            val = _parse_override(c.name, overrides[c.name])
        elif c.value is None:
            raise LangError(f"constant {c.name!r} is undefined; supply it with -c {c.name}=<value>", *c.pos)
        else:
            val = _const_eval(c.value, consts)
        if c.type == "int":
            if isinstance(val, bool) or float(val) != int(val):
                raise LangError(f"constant {c.name!r} must be an integer, got {val!r}", *c.pos)
            val = int(val)
        elif c.type == "double":
            val = float(val)
        elif c.type == "bool":
            if not isinstance(val, bool):
                raise LangError(f"constant {c.name!r} must be true or false", *c.pos)
        consts[c.name] = val

    players = [p.name for p in ast.players]
    if not players:
        raise LangError("model declares no players")
    module_names = [m.name for m in ast.modules]
    mod_owner: dict[str, int] = {}
    label_owner: dict[str, int] = {}
    all_labels = {c.action for m in ast.modules for c in m.commands if c.action}
    for i, p in enumerate(ast.players):
        for m in p.modules:
            if m not in module_names:
                raise LangError(f"player {p.name!r} claims unknown module {m!r}", *p.pos)
            if m in mod_owner:
                raise LangError(f"module {m!r} claimed by players {players[mod_owner[m]]!r} and {p.name!r}", *p.pos)
            mod_owner[m] = i
        for a in p.actions:
            if a not in all_labels:
                raise LangError(f"player {p.name!r} claims unused action [{a}]", *p.pos)
            if a in label_owner:
                raise LangError(f"action [{a}] claimed by players {players[label_owner[a]]!r} and {p.name!r}", *p.pos)
            label_owner[a] = i

    variables: list[_Var] = []
    module_vars: dict[str, list[_Var]] = {}
    for m in ast.modules:
        module_vars[m.name] = []
        for v in m.variables:
            if v.is_bool:
                low, high = 0, 1
                init = _const_eval(v.init, consts) if v.init is not None else False
                if not isinstance(init, bool):
                    raise LangError(f"initial value of {v.name!r} must be boolean", *v.pos)
                init = int(init)
            else:
                low, high = _const_eval(v.low, consts), _const_eval(v.high, consts)
                if any(isinstance(b, bool) or float(b) != int(b) for b in (low, high)):
                    raise LangError(f"bounds of {v.name!r} must be integers", *v.pos)
                low, high = int(low), int(high)
                if low > high:
                    raise LangError(f"empty range [{low}..{high}] for {v.name!r}", *v.pos)
                init = _const_eval(v.init, consts) if v.init is not None else low
                if isinstance(init, bool) or float(init) != int(init) or not low <= init <= high:
                    raise LangError(f"initial value {init!r} of {v.name!r} outside [{low}..{high}]", *v.pos)
                init = int(init)
            var = _Var(v.name, m.name, low, high, init, v.is_bool, len(variables))
            variables.append(var)
            module_vars[m.name].append(var)
    var_by_name = {v.name: v for v in variables}
    if not variables:
        raise LangError("model declares no variables")

    commands: list[_Cmd] = []
    warnings: list[str] = []
    names = set(var_by_name) | set(consts)
    for m in ast.modules:
        own_vars = {v.name for v in module_vars[m.name]}
        for c in m.commands:
            _check_names(c.guard, names)
            for u in c.updates:
                if u.prob is not None:
                    _check_names(u.prob, names)
                targets = set()
                for n, e in u.assignments:
                    if n not in own_vars:
                        raise LangError(f"module {m.name!r} cannot update variable {n!r}", *u.pos)
                    if n in targets:
                        raise LangError(f"variable {n!r} assigned twice in one update", *u.pos)
                    targets.add(n)
                    _check_names(e, names)
            if c.owner is not None:
                if c.owner not in players:
                    raise LangError(f"unknown player {c.owner!r}", *c.pos)
                owner = players.index(c.owner)
            elif c.action is not None and c.action in label_owner:
                owner = label_owner[c.action]
            elif m.name in mod_owner:
                owner = mod_owner[m.name]
                if c.action is not None:
                    warnings.append(
                        f"line {c.pos[0]}: action [{c.action}] has no owning player; "
                        f"using the owner of module {m.name!r} ({players[owner]})"
                    )
            else:
                raise LangError(f"command in module {m.name!r} has no owning player", *c.pos)
            action = c.action if c.action is not None else f"_tau_{m.name}_{c.pos[0]}"
            commands.append(_Cmd(m.name, action, c.action, owner, c.guard, c.updates, c.pos))
    for l in ast.labels:
        _check_names(l.expr, names)
    for r in ast.rewards:
        for it in r.items:
            _check_names(it.guard, names)
            _check_names(it.value, names)
            if it.action and it.action not in all_labels:
                raise LangError(f"reward on unknown action [{it.action}]", *it.pos)
    actions = sorted({c.action for c in commands})
    taus = [a for a in actions if a.startswith("_tau_")]
    if len(taus) != len({(c.module, c.pos[0]) for c in commands if c.label is None}):
        raise LangError("two unlabelled commands of one module share a line; put them on separate lines")
    return _Resolved(
        players, consts, variables, var_by_name, module_names, module_vars, actions, commands,
        list(ast.labels), list(ast.rewards), warnings,
    )


def _check_names(e: Expr, names: set[str]) -> None:
    if isinstance(e, Ident):
        if e.name not in names:
            raise LangError(f"unknown identifier {e.name!r}", *e.pos)
    elif isinstance(e, Unary):
        _check_names(e.arg, names)
    elif isinstance(e, Binary):
        _check_names(e.left, names)
        _check_names(e.right, names)
    elif isinstance(e, Ite):
        _check_names(e.cond, names)
        _check_names(e.then, names)
        _check_names(e.other, names)
    elif isinstance(e, Call):
        for a in e.args:
            _check_names(a, names)


# ----------------------------------------------------------------------
# explicit builder

_PY_OPS = {"=": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">=",
           "+": "+", "-": "-", "*": "*", "/": "/", "&": "and", "|": "or"}


def _py(e: Expr, var_index: Mapping[str, int], consts: Mapping[str, Any]) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, BoolLit):
        return repr(e.value)
    if isinstance(e, Ident):
        if e.name in var_index:
            i = var_index[e.name]
            # Boolean variables are stored as 0/1
            return f"(v[{i[0]}] == 1)" if isinstance(i, tuple) else f"v[{i}]"
        if e.name in consts:
            return repr(consts[e.name])
        raise LangError(f"unknown identifier {e.name!r}", *e.pos)
    if isinstance(e, Unary):
        a = _py(e.arg, var_index, consts)
        return f"(not {a})" if e.op == "!" else f"(-{a})"
    if isinstance(e, Binary):
        l, r = _py(e.left, var_index, consts), _py(e.right, var_index, consts)
        if e.op == "=>":
            return f"((not {l}) or {r})"
        return f"({l} {_PY_OPS[e.op]} {r})"
    if isinstance(e, Ite):
        return f"({_py(e.then, var_index, consts)} if {_py(e.cond, var_index, consts)} else {_py(e.other, var_index, consts)})"
    if isinstance(e, Call):
        args = [_py(a, var_index, consts) for a in e.args]
        if e.fn in ("min", "max"):
            return f"{e.fn}({', '.join(args)})"
        if e.fn == "mod":
            return f"({args[0]} % {args[1]})"
        if e.fn == "pow":
            return f"({args[0]} ** {args[1]})"
        return f"_math.{e.fn}({args[0]})"
    raise TypeError(f"not an expression: {e!r}")


def _compile_py(e: Expr, var_index: Mapping[str, int], consts: Mapping[str, Any]):
    src = _py(e, var_index, consts)
    return eval(f"lambda v: {src}", {"_math": math, "min": min, "max": max})


def build_explicit(ast: ModelAst, overrides: Mapping[str, Any] | None = None, *, warnings: list | None = None) -> ExplicitTsg:
    """Enumerate the reachable states of a model (breadth-first)."""
    res = _resolve(ast, overrides)
    if warnings is not None:
        warnings.extend(res.warnings)
    vidx = {v.name: (v.index, True) if v.is_bool else v.index for v in res.vars}
    consts = res.consts
    rank = {a: i for i, a in enumerate(res.actions)}

    def comp(e):
        return _compile_py(e, vidx, consts)

    # per module: list of (cmd, guard fn, [(prob fn, [(var index, value fn, low, high, name)])])
    by_label: dict[str, list[str]] = {}
    compiled: dict[str, list] = {m: [] for m in res.modules}
    for c in res.commands:
        ups = []
        for u in c.updates:
            pf = comp(u.prob) if u.prob is not None else None
            asg = [(res.var_by_name[n].index, comp(e), res.var_by_name[n]) for n, e in u.assignments]
            ups.append((pf, asg, u.pos))
        compiled[c.module].append((c, comp(c.guard), ups))
        if c.label is not None and c.module not in by_label.setdefault(c.label, []):
            by_label[c.label].append(c.module)

    def where(v):
        return "(" + ", ".join(f"{var.name}={_show(var, v[var.index])}" for var in res.vars) + ")"

    def call(fn, v, what, pos):
        try:
            return fn(v)
        except ZeroDivisionError:
            raise LangError(f"division by zero evaluating {what} in state {where(v)}", *pos) from None

    def local_dist(cmd, ups, v):
        """Distribution over this module's successor valuations: list of (assignments, prob)."""
        mod_idx = [var.index for var in res.module_vars[cmd.module]]
        out: dict[tuple, float] = {}
        total = 0.0
        for pf, asg, pos in ups:
            p = 1.0 if pf is None else call(pf, v, "a probability", pos)
            if isinstance(p, bool) or not (-PROB_TOL <= p <= 1.0 + PROB_TOL):
                raise LangError(f"probability {p!r} outside [0, 1] in state {where(v)}", *pos)
            total += p
            if p == 0:
                continue
            key = []
            for i, fn, var in asg:
                val = call(fn, v, "an update", pos)
                if var.is_bool:
                    if not isinstance(val, bool):
                        raise LangError(f"update of {var.name!r} is not boolean in state {where(v)}", *pos)
                    val = int(val)
                elif isinstance(val, bool) or val != int(val) or not var.low <= val <= var.high:
                    raise LangError(
                        f"update {var.name}'={val!r} outside [{var.low}..{var.high}] in state {where(v)}", *pos
                    )
                key.append((i, int(val)))
            local = dict((i, v[i]) for i in mod_idx)
            local.update(key)
            key = tuple(sorted(local.items()))
            out[key] = out.get(key, 0.0) + p
        if abs(total - 1.0) > PROB_TOL:
            raise LangError(
                f"probabilities sum to {total:.12g} in state {where(v)} for command [{cmd.label or ''}]", *cmd.pos
            )
        return list(out.items())

    def choices(v):
        """(action, owner, distribution) for every enabled choice of state v."""
        result = []
        enabled: dict[str, dict[str, list]] = {}
        for m in res.modules:
            for cmd, g, ups in compiled[m]:
                if not call(g, v, "a guard", cmd.pos):
                    continue
                if cmd.label is None:
                    result.append((cmd.action, {cmd.owner}, [local_dist(cmd, ups, v)]))
                else:
                    lst = enabled.setdefault(cmd.label, {}).setdefault(m, [])
                    if lst:
                        raise LangError(
                            f"module {m!r} has two enabled [{cmd.label}] commands in state {where(v)}", *cmd.pos
                        )
                    lst.append((cmd, ups))
        for label, per_mod in enabled.items():
            mods = by_label[label]
            if any(m not in per_mod for m in mods):
                continue
            owners = set()
            dists = []
            for m in mods:
                cmd, ups = per_mod[m][0]
                owners.add(cmd.owner)
                dists.append(local_dist(cmd, ups, v))
            result.append((label, owners, dists))
        return result

    init = tuple(var.init for var in res.vars)
    seen = {init: None}
    queue = deque([init])
    raw: dict[tuple, tuple[int, dict[str, list[tuple[tuple, float]]]]] = {}
    while queue:
        v = queue.popleft()
        owners_here: set[int] = set()
        acts: dict[str, list[tuple[tuple, float]]] = {}
        for action, owners, dists in choices(v):
            if len(owners) != 1:
                raise LangError(
                    f"multiple players controlling actions in the same state: synchronised action "
                    f"[{action}] in state {where(v)} involves {sorted(res.players[o] for o in owners)}"
                )
            owners_here |= owners
            succ: dict[tuple, float] = {}
            for combo in product(*dists):
                t = list(v)
                p = 1.0
                for key, q in combo:
                    for i, val in key:
                        t[i] = val
                    p = p * q
                t = tuple(t)
                succ[t] = succ.get(t, 0.0) + p
            acts[action] = list(succ.items())
        if not acts:
            raise LangError(f"deadlock: no command enabled in state {where(v)}")
        if len(owners_here) > 1:
            raise LangError(
                f"multiple players controlling actions in the same state {where(v)}: "
                f"{sorted(res.players[o] for o in owners_here)}"
            )
        raw[v] = (owners_here.pop(), acts)
        for dist in acts.values():
            for t, _ in dist:
                if t not in seen:
                    seen[t] = None
                    queue.append(t)

    order = sorted(raw)
    index = {s: i for i, s in enumerate(order)}
    delta = {}
    for s in order:
        _, acts = raw[s]
        for a, dist in acts.items():
            delta[(index[s], rank[a])] = tuple(sorted((index[t], p) for t, p in dist))
    delta = dict(sorted(delta.items()))

    labels = {}
    for l in res.labels:
        fn = comp(l.expr)
        labels[l.name] = frozenset(i for i, s in enumerate(order) if call(fn, s, "a label", l.pos))
    rewards = {}
    for r in res.rewards:
        sr: dict[int, float] = {}
        ar: dict[tuple[int, int], float] = {}
        for i, s in enumerate(order):
            _, acts = raw[s]
            total = 0.0
            for it in r.items:
                if it.action is not None:
                    continue
                if call(comp(it.guard), s, "a reward guard", it.pos):
                    total = total + _reward_value(call(comp(it.value), s, "a reward", it.pos), it, where(s))
            if total:
                sr[i] = total
            for a in acts:
                total = 0.0
                for it in r.items:
                    if it.action is None or not _reward_matches(it.action, a):
                        continue
                    if call(comp(it.guard), s, "a reward guard", it.pos):
                        total = total + _reward_value(call(comp(it.value), s, "a reward", it.pos), it, where(s))
                if total:
                    ar[(i, rank[a])] = total
        rewards[r.name] = RewardStructure(sr, ar)
    return ExplicitTsg(
        players=tuple(res.players),
        state_vars=tuple(v.name for v in res.vars),
        states=tuple(tuple(_show(var, s[var.index]) for var in res.vars) for s in order),
        owner=tuple(raw[s][0] for s in order),
        init=index[init],
        actions=tuple(res.actions),
        delta=delta,
        labels=labels,
        rewards=rewards,
    )


def _show(var: _Var, value: int):
    return bool(value) if var.is_bool else value


def _reward_matches(item_action: str, action: str) -> bool:
    if item_action == "":
        return action.startswith("_tau_")
    return item_action == action


def _reward_value(val, it: RewardItem, where: str) -> float:
    if isinstance(val, bool) or not math.isfinite(val) or val < 0:
        raise LangError(f"reward value {val!r} must be finite and non-negative (state {where})", *it.pos)
    return float(val)


# ----------------------------------------------------------------------
# symbolic builder


class _SymCompiler:
    def __init__(self, res: _Resolved, mgr: Manager, x: list[int], y: list[int], layout: dict[str, StateVar]):
        self.res = res
        self.mgr = mgr
        self.x = x
        self.y = y
        self.layout = layout
        self._var_cache: dict[str, Mtbdd] = {}

    def bits(self, name: str, primed: bool = False) -> list[int]:
        lv = self.y if primed else self.x
        return [lv[i] for i in self.layout[name].bits]

    def var_value(self, name: str) -> Mtbdd:
        m = self._var_cache.get(name)
        if m is None:
            sv = self.layout[name]
            rows = [(to_bits(k, sv.width), float(sv.low + k)) for k in range(sv.high - sv.low + 1)]
            m = self.mgr.from_minterms(self.bits(name), rows)
            self._var_cache[name] = m
        return m

    def value_cube(self, name: str, value: int, primed: bool) -> Bdd:
        sv = self.layout[name]
        return self.mgr.cube(dict(zip(self.bits(name, primed), to_bits(value - sv.low, sv.width))))

    def identity(self, names) -> Bdd:
        mgr = self.mgr
        out = mgr.true
        for n in names:
            for a, b in zip(self.bits(n), self.bits(n, True)):
                xa, yb = mgr.var(a), mgr.var(b)
                out = out & ((xa & yb) | (~xa & ~yb))
        return out

    def boolean(self, e: Expr) -> Bdd:
        m = self.expr(e)
        try:
            return self.mgr.as_bdd(m)
        except MtbddError:
            raise LangError("expected a boolean expression", *e.pos) from None

    def expr(self, e: Expr) -> Mtbdd:
        mgr = self.mgr
        if isinstance(e, Num):
            return mgr.const(e.value)
        if isinstance(e, BoolLit):
            return mgr.true if e.value else mgr.false
        if isinstance(e, Ident):
            if e.name in self.layout:
                return self.var_value(e.name)
            v = self.res.consts[e.name]
            if isinstance(v, bool):
                return mgr.true if v else mgr.false
            return mgr.const(v)
        if isinstance(e, Unary):
            if e.op == "!":
                return mgr.not_(self.boolean(e.arg))
            return mgr.apply("-", mgr.const(0.0), self.expr(e.arg))
        if isinstance(e, Binary):
            op = e.op
            if op in ("&", "|", "=>"):
                l, r = self.boolean(e.left), self.boolean(e.right)
                if op == "&":
                    return mgr.and_(l, r)
                if op == "|":
                    return mgr.or_(l, r)
                return mgr.or_(mgr.not_(l), r)
            l, r = self.expr(e.left), self.expr(e.right)
            if op == "/":
                return self._safe(lambda: mgr.apply_fn(_div, l, r, key="div"), e)
            return self._safe(lambda: mgr.apply("==" if op == "=" else op, l, r), e)
        if isinstance(e, Ite):
            return mgr.if_then_else(self.boolean(e.cond), self.expr(e.then), self.expr(e.other))
        if isinstance(e, Call):
            args = [self.expr(a) for a in e.args]
            if e.fn in ("min", "max"):
                out = args[0]
                for a in args[1:]:
                    out = mgr.apply(e.fn, out, a)
                return out
            if e.fn == "mod":
                return self._safe(lambda: mgr.apply_fn(lambda a, b: a % b, args[0], args[1], key="mod"), e)
            if e.fn == "pow":
                return self._safe(lambda: mgr.apply_fn(lambda a, b: a**b, args[0], args[1], key="pow"), e)
            f = getattr(math, e.fn)
            return mgr.map_terminals(lambda a: f(a), args[0], key=e.fn)
        raise TypeError(f"not an expression: {e!r}")

    def _safe(self, thunk, e):
        try:
            return thunk()
        except MtbddError as exc:
            raise LangError(f"cannot evaluate expression: {exc}", *e.pos) from None


def _div(a: float, b: float) -> float:
    if b == 0:
        raise ZeroDivisionError("division by zero")
    return a / b


def build_symbolic(
    ast: ModelAst,
    overrides: Mapping[str, Any] | None = None,
    manager: Manager | None = None,
    *,
    warnings: list | None = None,
) -> SymbolicTsg:
    """Compose the transition MTBDD command by command, module by module."""
    res = _resolve(ast, overrides)
    if warnings is not None:
        warnings.extend(res.warnings)
    layout: dict[str, StateVar] = {}
    pos = 0
    for v in res.vars:
        w = nbits(v.high - v.low + 1)
        layout[v.name] = StateVar(v.name, v.low, v.high, list(range(pos, pos + w)), "bool" if v.is_bool else "int")
        pos += w
    nplayers, abits, sbits = len(res.players), nbits(len(res.actions)), pos
    mgr = manager if manager is not None else make_manager(nplayers, abits, sbits)
    try:
        wv, zv, xv, yv, zp = variable_blocks(mgr, nplayers, abits, sbits)
    except MtbddError as exc:
        raise LangError(f"manager lacks the variables this model needs: {exc}") from None
    sc = _SymCompiler(res, mgr, xv, yv, layout)
    cubes = player_cube_list(mgr, wv)
    rank = {a: i for i, a in enumerate(res.actions)}

    def where_bdd(b: Bdd) -> str:
        bits, _ = next(mgr.minterms(mgr.pick_least(b, xv), xv))
        return "(" + ", ".join(
            f"{sv.name}={_show_sv(sv, sv.low + _bits_value([bits[i] for i in sv.bits]))}" for sv in layout.values()
        ) + ")"

    # guard and update diagrams per command
    problems: list[tuple[Bdd, str]] = []  # (states where the problem occurs, message)
    cmd_mtbdd: list[Mtbdd] = []
    cmd_guard: list[Bdd] = []
    for c in res.commands:
        guard = sc.boolean(c.guard)
        total = mgr.const(0.0)
        dist = mgr.const(0.0)
        for u in c.updates:
            p = sc.expr(u.prob) if u.prob is not None else mgr.const(1.0)
            bad_p = mgr.or_(mgr.threshold(p, "<", -PROB_TOL), mgr.threshold(p, ">", 1.0 + PROB_TOL))
            problems.append((guard & bad_p, f"line {u.pos[0]}: probability outside [0, 1]"))
            total = total + p
            rel = mgr.true
            assigned = set()
            for n, e in u.assignments:
                sv = layout[n]
                val = sc.expr(e)
                cover = mgr.false
                r = mgr.false
                for k in range(sv.low, sv.high + 1):
                    hit = mgr.threshold(val, "==", float(k))
                    cover = cover | hit
                    r = r | (hit & sc.value_cube(n, k, True))
                problems.append((guard & ~cover, f"line {u.pos[0]}: update of {n!r} outside [{sv.low}..{sv.high}]"))
                rel = rel & r
                assigned.add(n)
            rel = rel & sc.identity(v.name for v in res.module_vars[c.module] if v.name not in assigned)
            dist = dist + p * rel
        sums_to_one = mgr.apply("~=", total, mgr.const(1.0), eps=PROB_TOL)
        problems.append((guard & ~sums_to_one, f"line {c.pos[0]}: probabilities do not sum to 1"))
        cmd_guard.append(guard)
        cmd_mtbdd.append(mgr.if_then_else(guard, dist, mgr.const(0.0)))

    # synchronisation: per (label, owner) product across participating modules
    label_mods: dict[str, list[str]] = {}
    for c in res.commands:
        if c.label is not None and c.module not in label_mods.setdefault(c.label, []):
            label_mods[c.label].append(c.module)
    parts: list[tuple[int, int, Mtbdd]] = []  # (owner, action rank, transition diagram)
    for idx, c in enumerate(res.commands):
        if c.label is None:
            others = [v.name for v in res.vars if v.module != c.module]
            parts.append((c.owner, rank[c.action], cmd_mtbdd[idx] * sc.identity(others)))
    for label, mods in label_mods.items():
        members = [i for i, c in enumerate(res.commands) if c.label == label]
        owners = sorted({res.commands[i].owner for i in members})
        # two enabled commands with one label in one module
        for m in mods:
            mine = [i for i in members if res.commands[i].module == m]
            for a in range(len(mine)):
                for b in range(a + 1, len(mine)):
                    problems.append(
                        (cmd_guard[mine[a]] & cmd_guard[mine[b]],
                         f"module {m!r} has two enabled [{label}] commands (lines "
                         f"{res.commands[mine[a]].pos[0]} and {res.commands[mine[b]].pos[0]})")
                    )
        any_owner = mgr.true
        per_owner_enabled = mgr.false
        for p in owners:
            t = mgr.const(1.0)
            en = mgr.true
            for m in mods:
                mm = mgr.const(0.0)
                g = mgr.false
                for i in members:
                    if res.commands[i].module == m and res.commands[i].owner == p:
                        mm = mm + cmd_mtbdd[i]
                        g = g | cmd_guard[i]
                t = t * mm
                en = en & g
            rest = [v.name for v in res.vars if v.module not in mods]
            parts.append((p, rank[label], t * sc.identity(rest)))
            per_owner_enabled = per_owner_enabled | en
        for m in mods:
            any_owner = any_owner & mgr.disjoin(cmd_guard[i] for i in members if res.commands[i].module == m)
        problems.append(
            (any_owner & ~per_owner_enabled,
             f"multiple players controlling actions in the same state: synchronised action [{label}] mixes owners")
        )

    trans = mgr.const(0.0)
    for owner, r, t in parts:
        trans = trans + (cubes[owner] & _action_cube(mgr, zv, r, abits)) * t

    init_valn = {}
    for v in res.vars:
        sv = layout[v.name]
        init_valn.update(zip(sc.bits(v.name), to_bits(v.init - v.low, sv.width)))
    init = mgr.cube(init_valn)

    sym = SymbolicTsg(
        manager=mgr,
        players=list(res.players),
        actions=list(res.actions),
        w=wv, z=zv, x=xv, y=yv, zp=zp,
        trans=trans,
        init=init,
        reach=mgr.false,
        label_bdds={},
        reward_mtbdds={},
        player_cubes=cubes,
        layout=list(layout.values()),
    )
    reach = reachable(sym)
    sym.reach = reach

    diagnostics = []
    for states, msg in problems:
        hit = states & reach
        if not hit.is_false:
            diagnostics.append(f"{msg} in state {where_bdd(hit)}")
    sym._cache.clear()
    rows = sym.rows
    owner_sets = [mgr.exists(zv, rows & cubes[i]) for i in range(nplayers)]
    owner_sets = [mgr.exists(wv, o) for o in owner_sets]
    for i in range(nplayers):
        for j in range(i + 1, nplayers):
            clash = owner_sets[i] & owner_sets[j] & reach
            if not clash.is_false:
                diagnostics.append(
                    f"multiple players controlling actions in the same state {where_bdd(clash)}: "
                    f"{res.players[i]} and {res.players[j]}"
                )
    dead = reach & ~mgr.disjoin(owner_sets)
    if not dead.is_false:
        diagnostics.append(f"deadlock: no command enabled in state {where_bdd(dead)}")
    if diagnostics:
        raise LangError(diagnostics[0], diagnostics=diagnostics)

    sym.trans = mgr.if_then_else(reach, trans, mgr.const(0.0))
    sym._cache.clear()
    sym.label_bdds = {l.name: sc.boolean(l.expr) & reach for l in res.labels}
    for r in res.rewards:
        srew = mgr.const(0.0)
        arew_by_rank: dict[int, Mtbdd] = {}
        for it in r.items:
            guard = sc.boolean(it.guard)
            val = sc.expr(it.value)
            bad = guard & reach & (mgr.threshold(val, "<", 0.0) | mgr.threshold(val, "==", math.inf))
            if not bad.is_false:
                raise LangError(f"reward value must be finite and non-negative (state {where_bdd(bad)})", *it.pos)
            contrib = mgr.if_then_else(guard, val, mgr.const(0.0))
            if it.action is None:
                srew = srew + contrib
            else:
                for a in res.actions:
                    if _reward_matches(it.action, a):
                        k = rank[a]
                        arew_by_rank[k] = arew_by_rank.get(k, mgr.const(0.0)) + contrib
        arew = mgr.const(0.0)
        for k, m in sorted(arew_by_rank.items()):
            arew = arew + _action_cube(mgr, zv, k, abits) * m
        arew = mgr.if_then_else(rows & reach, arew, mgr.const(0.0))
        sym.reward_mtbdds[r.name] = (mgr.if_then_else(reach, srew, mgr.const(0.0)), arew)
    return sym


def _action_cube(mgr: Manager, zv: Sequence[int], rank: int, abits: int) -> Bdd:
    return mgr.cube(dict(zip(zv, to_bits(rank, abits))))


def _bits_value(bits) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | b
    return v


def _show_sv(sv: StateVar, value: int):
    return bool(value) if sv.kind == "bool" else value
