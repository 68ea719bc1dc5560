"""Explicit and symbolic turn-based stochastic games.

An :class:`ExplicitTsg` lists states, owners and distributions directly. A
:class:`SymbolicTsg` stores the whole game as one MTBDD ``trans`` over the
variable blocks

    w1..wm   one-hot player code
    z1..zl   binary action rank
    x1 y1 .. xk yk   interleaved source (row) and target (column) state bits
    z1'..zl' a copy of the action bits used by strategies

so that ``trans(i, a, s, s')`` is ``delta(s, a)(s')`` when ``s`` belongs to
player ``i`` and 0 otherwise.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .mtbdd import Bdd, Manager, Mtbdd

__all__ = [
    "Coalition",
    "ExplicitTsg",
    "ModelError",
    "RewardStructure",
    "StateVar",
    "SymbolicTsg",
    "decode",
    "encode",
    "format_text",
    "parse_text",
    "player_partition_bdds",
    "reachable",
    "validate",
]

PROB_TOL = 1e-9


class ModelError(Exception):
    """An ill-formed game or model."""

    def __init__(self, message: str, diagnostics: Sequence[str] = ()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class RewardStructure:
    state_reward: Mapping[int, float] = field(default_factory=dict)
    action_reward: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def state_vector(self, n: int) -> np.ndarray:
        v = np.zeros(n)
        for s, r in self.state_reward.items():
            v[s] = r
        return v


@dataclass(frozen=True)
class Coalition:
    """A set of player indices; the rest of the players form the opponent."""

    members: frozenset[int]

    @classmethod
    def of(cls, players: Sequence[str], who: Iterable[int | str]) -> Coalition:
        out = set()
        for p in who:
            if isinstance(p, str):
                if p not in players:
                    raise ModelError(f"unknown player {p!r}")
                out.add(players.index(p))
            else:
                if not 0 <= p < len(players):
                    raise ModelError(f"player index {p} out of range")
                out.add(p)
        return cls(frozenset(out))

    def complement(self, nplayers: int) -> Coalition:
        return Coalition(frozenset(range(nplayers)) - self.members)

    def __contains__(self, i: int) -> bool:
        return i in self.members


@dataclass(frozen=True, eq=False)
class ExplicitTsg:
    """An enumerated game.

    ``delta`` maps ``(state, action index)`` to a tuple of ``(successor,
    probability)`` pairs. ``actions`` is sorted, so an action's index is
    also its rank in the binary action encoding.
    """

    players: tuple[str, ...]
    state_vars: tuple[str, ...]
    states: tuple[tuple[Any, ...], ...]
    owner: tuple[int, ...]
    init: int
    actions: tuple[str, ...]
    delta: Mapping[tuple[int, int], tuple[tuple[int, float], ...]]
    labels: Mapping[str, frozenset[int]] = field(default_factory=dict)
    rewards: Mapping[str, RewardStructure] = field(default_factory=dict)

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_choices(self) -> int:
        return len(self.delta)

    @property
    def num_transitions(self) -> int:
        return sum(len(d) for d in self.delta.values())

    def enabled(self, s: int) -> list[int]:
        return sorted(a for (t, a) in self.delta if t == s)

    def choices(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {s: [] for s in range(self.num_states)}
        for s, a in sorted(self.delta):
            out[s].append(a)
        return out

    def label_vector(self, name: str) -> np.ndarray:
        v = np.zeros(self.num_states, dtype=bool)
        v[list(self.labels.get(name, ()))] = True
        return v

    def same_as(self, other: ExplicitTsg, tol: float = 0.0) -> bool:
        """Structural equality with the state order taken as given."""
        if (
            self.players != other.players
            or self.states != other.states
            or self.owner != other.owner
            or self.init != other.init
            or self.actions != other.actions
            or set(self.delta) != set(other.delta)
        ):
            return False
        for k, d in self.delta.items():
            a, b = sorted(d), sorted(other.delta[k])
            if [t for t, _ in a] != [t for t, _ in b]:
                return False
            if any(abs(p - q) > tol for (_, p), (_, q) in zip(a, b)):
                return False
        if {k: v for k, v in self.labels.items() if v} != {k: v for k, v in other.labels.items() if v}:
            return False
        if set(self.rewards) != set(other.rewards):
            return False
        for name, r in self.rewards.items():
            o = other.rewards[name]
            if {k: v for k, v in r.state_reward.items() if v} != {k: v for k, v in o.state_reward.items() if v}:
                return False
            if {k: v for k, v in r.action_reward.items() if v} != {k: v for k, v in o.action_reward.items() if v}:
                return False
        return True


def validate(game: ExplicitTsg) -> list[str]:
    """Diagnostics for every broken game invariant; empty when well-formed."""
    diags = []
    n = game.num_states
    if len(game.owner) != n:
        diags.append(f"owner map covers {len(game.owner)} of {n} states")
    for s, i in enumerate(game.owner):
        if not 0 <= i < len(game.players):
            diags.append(f"state {s}: owner {i} is not a player")
    if not 0 <= game.init < max(n, 1) or n == 0:
        diags.append(f"initial state {game.init} out of range")
    has_action = [False] * n
    for (s, a), dist in sorted(game.delta.items()):
        where = f"state {s}, action {game.actions[a] if 0 <= a < len(game.actions) else a}"
        if not 0 <= s < n:
            diags.append(f"{where}: source state out of range")
            continue
        if not 0 <= a < len(game.actions):
            diags.append(f"{where}: unknown action index")
            continue
        has_action[s] = True
        total = 0.0
        for t, p in dist:
            if not 0 <= t < n:
                diags.append(f"{where}: successor {t} out of range")
            if not (0.0 < p <= 1.0 + PROB_TOL):
                diags.append(f"{where}: probability {p} outside (0, 1]")
            total += p
        if abs(total - 1.0) > PROB_TOL:
            diags.append(f"{where}: distribution sums to {total:.12g}, not 1")
    for s in range(n):
        if not has_action[s]:
            diags.append(f"state {s}: deadlock, no enabled action")
    for name, states in game.labels.items():
        bad = [s for s in states if not 0 <= s < n]
        if bad:
            diags.append(f"label {name!r}: states {bad} out of range")
    for name, r in game.rewards.items():
        for s, v in r.state_reward.items():
            if not (math.isfinite(v) and v >= 0):
                diags.append(f"reward {name!r}: state {s} has invalid value {v}")
        for (s, a), v in r.action_reward.items():
            if not (math.isfinite(v) and v >= 0):
                diags.append(f"reward {name!r}: state {s} action {a} has invalid value {v}")
    return diags


# ----------------------------------------------------------------------
# symbolic representation


def nbits(n: int) -> int:
    """Bits needed for ``n`` distinct codes (at least one)."""
    return max(1, (n - 1).bit_length())


def to_bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def from_bits(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | (1 if b else 0)
    return v


def variable_names(nplayers: int, abits: int, sbits: int) -> list[str]:
    names = [f"w{i + 1}" for i in range(nplayers)]
    names += [f"z{i + 1}" for i in range(abits)]
    for i in range(sbits):
        names += [f"x{i + 1}", f"y{i + 1}"]
    names += [f"z{i + 1}'" for i in range(abits)]
    return names


@dataclass
class StateVar:
    """A model variable occupying a contiguous run of state bits."""

    name: str
    low: int
    high: int
    bits: list[int]  # positions into the x/y blocks, MSB first
    kind: str = "int"  # "int" or "bool"

    @property
    def width(self) -> int:
        return len(self.bits)


@dataclass
class SymbolicTsg:
    manager: Manager
    players: list[str]
    actions: list[str]
    w: list[int]
    z: list[int]
    x: list[int]
    y: list[int]
    zp: list[int]
    trans: Mtbdd
    init: Bdd
    reach: Bdd
    label_bdds: dict[str, Bdd]
    reward_mtbdds: dict[str, tuple[Mtbdd, Mtbdd]]
    player_cubes: list[Bdd]
    layout: list[StateVar]
    index_valuations: tuple | None = None
    index_var_names: tuple[str, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    # -- derived sets -------------------------------------------------
    @property
    def trans01(self) -> Bdd:
        """Support of ``trans`` as a BDD over (w, z, x, y)."""
        b = self._cache.get("trans01")
        if b is None:
            b = self._cache["trans01"] = self.manager.nonzero(self.trans)
        return b

    @property
    def rows(self) -> Bdd:
        """Enabled (player, action, state) rows."""
        b = self._cache.get("rows")
        if b is None:
            b = self._cache["rows"] = self.manager.exists(self.y, self.trans01)
        return b

    @property
    def enabled(self) -> Bdd:
        """Enabled (action, state) pairs."""
        b = self._cache.get("enabled")
        if b is None:
            b = self._cache["enabled"] = self.manager.exists(self.w, self.rows)
        return b

    def owned_states(self, players: Iterable[int]) -> Bdd:
        """States (over x) owned by any of ``players``."""
        mgr = self.manager
        cube = mgr.disjoin(self.player_cubes[i] for i in players)
        return mgr.exists(self.w + self.z, mgr.and_(self.rows, cube))

    def coalition_cube(self, players: Iterable[int]) -> Bdd:
        return self.manager.disjoin(self.player_cubes[i] for i in players)

    def state_cube(self, code: int) -> Bdd:
        bits = to_bits(code, len(self.x))
        return self.manager.cube(dict(zip(self.x, bits)))

    def action_cube(self, rank: int, primed: bool = False) -> Bdd:
        vs = self.zp if primed else self.z
        return self.manager.cube(dict(zip(vs, to_bits(rank, len(vs)))))

    def label(self, name: str) -> Bdd:
        try:
            return self.label_bdds[name]
        except KeyError:
            raise ModelError(f"unknown label {name!r}") from None

    # -- state indexing -----------------------------------------------
    @property
    def codes(self) -> list[int]:
        """Sorted binary codes of the reachable states."""
        c = self._cache.get("codes")
        if c is None:
            c = sorted(from_bits(b) for b, _ in self.manager.minterms(self.reach, self.x))
            self._cache["codes"] = c
        return c

    @property
    def code_index(self) -> dict[int, int]:
        d = self._cache.get("code_index")
        if d is None:
            d = self._cache["code_index"] = {c: i for i, c in enumerate(self.codes)}
        return d

    @property
    def num_states(self) -> int:
        return len(self.codes)

    @property
    def init_index(self) -> int:
        (bits, _), = self.manager.minterms(self.init, self.x)
        return self.code_index[from_bits(bits)]

    def valuation(self, code: int) -> tuple:
        if self.index_valuations is not None:
            return tuple(self.index_valuations[code])
        bits = to_bits(code, len(self.x))
        vals = []
        for v in self.layout:
            k = v.low + from_bits([bits[i] for i in v.bits])
            vals.append(bool(k) if v.kind == "bool" else k)
        return tuple(vals)

    @property
    def state_var_names(self) -> tuple[str, ...]:
        if self.index_var_names is not None:
            return self.index_var_names
        return tuple(v.name for v in self.layout)

    def to_vector(self, m: Mtbdd) -> np.ndarray:
        """Dense vector (reachable states in code order) of a diagram over x."""
        out = np.zeros(self.num_states)
        idx = self.code_index
        restricted = self.manager.if_then_else(self.reach, m, self.manager.const(0.0))
        for bits, v in self.manager.minterms(restricted, self.x):
            i = idx.get(from_bits(bits))
            if i is not None:
                out[i] = v
        return out

    def to_set(self, b: Mtbdd) -> set[int]:
        return {i for i, v in enumerate(self.to_vector(b)) if v}

    def from_vector(self, values: Sequence[float]) -> Mtbdd:
        rows = [(to_bits(c, len(self.x)), float(v)) for c, v in zip(self.codes, values)]
        return self.manager.from_minterms(self.x, rows)

    def from_set(self, states: Iterable[int]) -> Bdd:
        codes = self.codes
        rows = [(to_bits(codes[s], len(self.x)), 1.0) for s in states]
        return self.manager.as_bdd(self.manager.from_minterms(self.x, rows))

    def node_count(self) -> int:
        return self.manager.node_count(self.trans)

    def num_transitions(self) -> int:
        mgr = self.manager
        b = mgr.and_(self.trans01, self.reach)
        return mgr.sat_count(b, self.w + self.z + self.x + self.y)


def player_cube_list(mgr: Manager, w: Sequence[int]) -> list[Bdd]:
    cubes = []
    for i in range(len(w)):
        cubes.append(mgr.cube({lv: (j == i) for j, lv in enumerate(w)}))
    return cubes


def player_partition_bdds(sym: SymbolicTsg, c: Coalition | Iterable[int]) -> tuple[Bdd, Bdd]:
    """Disjunctions of player cubes for the coalition and its complement."""
    members = c.members if isinstance(c, Coalition) else frozenset(c)
    n = len(sym.players)
    if not members <= set(range(n)):
        raise ModelError("coalition contains an unknown player")
    mgr = sym.manager
    p1 = mgr.disjoin(sym.player_cubes[i] for i in sorted(members))
    p2 = mgr.disjoin(sym.player_cubes[i] for i in range(n) if i not in members)
    return p1, p2


def make_manager(nplayers: int, abits: int, sbits: int, max_nodes: int | None = None) -> Manager:
    return Manager(variable_names(nplayers, abits, sbits), max_nodes=max_nodes)


def variable_blocks(mgr: Manager, nplayers: int, abits: int, sbits: int):
    lv = mgr.level
    w = [lv(f"w{i + 1}") for i in range(nplayers)]
    z = [lv(f"z{i + 1}") for i in range(abits)]
    x = [lv(f"x{i + 1}") for i in range(sbits)]
    y = [lv(f"y{i + 1}") for i in range(sbits)]
    zp = [lv(f"z{i + 1}'") for i in range(abits)]
    return w, z, x, y, zp


def encode(game: ExplicitTsg, manager: Manager | None = None) -> SymbolicTsg:
    """Single-MTBDD encoding of an explicit game (state code = state index)."""
    diags = validate(game)
    if diags:
        raise ModelError("invalid game", diags)
    m = len(game.players)
    ab = nbits(len(game.actions))
    sb = nbits(game.num_states)
    mgr = manager if manager is not None else make_manager(m, ab, sb)
    try:
        w, z, x, y, zp = variable_blocks(mgr, m, ab, sb)
    except Exception as exc:
        raise ModelError(f"manager lacks the variables this game needs: {exc}") from None

    def onehot(i):
        return [1 if j == i else 0 for j in range(m)]

    def inter(s, t):
        out = []
        for a, b in zip(to_bits(s, sb), to_bits(t, sb)):
            out += [a, b]
        return out

    xy = [v for pair in zip(x, y) for v in pair]
    order = w + z + xy
    if order != sorted(order):
        raise ModelError("manager variable order does not follow the w, z, x/y layout")
    rows = []
    for (s, a), dist in game.delta.items():
        head = onehot(game.owner[s]) + to_bits(a, ab)
        for t, p in dist:
            rows.append((head + inter(s, t), p))
    trans = mgr.from_minterms(order, rows)

    def state_set(states):
        return mgr.as_bdd(mgr.from_minterms(x, [(to_bits(s, sb), 1.0) for s in states]))

    labels = {name: state_set(sts) for name, sts in game.labels.items()}
    rewards = {}
    for name, r in game.rewards.items():
        srew = mgr.from_minterms(x, [(to_bits(s, sb), v) for s, v in r.state_reward.items()])
        arew = mgr.from_minterms(
            w + z + x,
            [(onehot(game.owner[s]) + to_bits(a, ab) + to_bits(s, sb), v) for (s, a), v in r.action_reward.items()],
        )
        rewards[name] = (srew, arew)
    sym = SymbolicTsg(
        manager=mgr,
        players=list(game.players),
        actions=list(game.actions),
        w=w,
        z=z,
        x=x,
        y=y,
        zp=zp,
        trans=trans,
        init=state_set([game.init]),
        reach=mgr.false,
        label_bdds=labels,
        reward_mtbdds=rewards,
        player_cubes=player_cube_list(mgr, w),
        layout=[StateVar("_s", 0, game.num_states - 1, list(range(sb)))],
        index_valuations=tuple(game.states),
        index_var_names=tuple(game.state_vars),
    )
    sym.reach = reachable(sym)
    return sym


def reachable(sym: SymbolicTsg) -> Bdd:
    """Forward closure of the initial states under ``trans > 0``."""
    mgr = sym.manager
    step = mgr.exists(sym.w + sym.z, sym.trans01)
    r = sym.init
    frontier = r
    while True:
        img = mgr.exists(sym.x, mgr.and_(step, frontier))
        img = mgr.replace_vars(img, sym.y, sym.x)
        new = mgr.and_(img, mgr.not_(r))
        if new.is_false:
            return r
        r = mgr.or_(r, new)
        frontier = new


def decode(sym: SymbolicTsg) -> ExplicitTsg:
    """Explicit game over the reachable states, numbered in code order."""
    mgr = sym.manager
    idx = sym.code_index
    nw, nz, nx = len(sym.w), len(sym.z), len(sym.x)
    inner = [v for pair in zip(sym.x, sym.y) for v in pair]
    restricted = mgr.if_then_else(sym.reach, sym.trans, mgr.const(0.0))
    owner: dict[int, int] = {}
    delta: dict[tuple[int, int], list[tuple[int, float]]] = {}
    problems = []
    for bits, p in mgr.minterms(restricted, sym.w + sym.z + inner):
        wb = bits[:nw]
        if sum(wb) != 1:
            problems.append(f"row with non-one-hot player code {wb}")
            continue
        i = wb.index(1)
        a = from_bits(bits[nw : nw + nz])
        xy = bits[nw + nz :]
        s = idx[from_bits(xy[0::2])]
        t_code = from_bits(xy[1::2])
        if t_code not in idx:
            problems.append(f"state {s} moves to unreachable code {t_code}")
            continue
        if a >= len(sym.actions):
            problems.append(f"state {s} uses unknown action rank {a}")
            continue
        prev = owner.setdefault(s, i)
        if prev != i:
            problems.append(
                f"state {sym.valuation(sym.codes[s])}: controlled by both "
                f"{sym.players[prev]} and {sym.players[i]}"
            )
        delta.setdefault((s, a), []).append((idx[t_code], p))
    n = sym.num_states
    missing = [s for s in range(n) if s not in owner]
    if missing:
        problems.append(f"states without enabled actions: {missing[:10]}")
    if problems:
        raise ModelError("symbolic game cannot be decoded", problems)
    labels = {name: frozenset(sym.to_set(b)) for name, b in sym.label_bdds.items()}
    rewards = {}
    for name, (srew, arew) in sym.reward_mtbdds.items():
        sv = sym.to_vector(srew)
        ar = {}
        ar_r = mgr.and_(mgr.nonzero(arew), mgr.and_(sym.rows, sym.reach))
        masked = mgr.if_then_else(ar_r, arew, mgr.const(0.0))
        for bits, v in mgr.minterms(masked, sym.w + sym.z + sym.x):
            a = from_bits(bits[nw : nw + nz])
            s = idx[from_bits(bits[nw + nz :])]
            ar[(s, a)] = v
        rewards[name] = RewardStructure({s: float(v) for s, v in enumerate(sv) if v}, ar)
    return ExplicitTsg(
        players=tuple(sym.players),
        state_vars=sym.state_var_names,
        states=tuple(sym.valuation(c) for c in sym.codes),
        owner=tuple(owner[s] for s in range(n)),
        init=sym.init_index,
        actions=tuple(sym.actions),
        delta={k: tuple(sorted(v)) for k, v in sorted(delta.items())},
        labels=labels,
        rewards=rewards,
    )


# ----------------------------------------------------------------------
# text format


def format_text(game: ExplicitTsg) -> str:
    lines = [f"tsg {game.num_states} {len(game.players)}"]
    for i, p in enumerate(game.players):
        lines.append(f"player {i + 1} {p}")
    lines.append(f"init {game.init}")
    by_state: dict[int, list[str]] = {s: [] for s in range(game.num_states)}
    for name in sorted(game.labels):
        for s in sorted(game.labels[name]):
            by_state[s].append(name)
    for s in range(game.num_states):
        lines.append(" ".join([f"state {s} {game.owner[s] + 1}", *by_state[s]]).rstrip())
    for (s, a), dist in sorted(game.delta.items()):
        succ = " ".join(f"{t}:{p!r}" for t, p in dist)
        lines.append(f"tr {s} {game.actions[a]} {succ}")
    for name in sorted(game.rewards):
        r = game.rewards[name]
        for s, v in sorted(r.state_reward.items()):
            lines.append(f"srew {name} {s} {v!r}")
        for (s, a), v in sorted(r.action_reward.items()):
            lines.append(f"arew {name} {s} {game.actions[a]} {v!r}")
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> ExplicitTsg:
    """Read the line-oriented explicit format; raises :class:`ModelError`."""
    n = np_ = None
    players: dict[int, str] = {}
    init = 0
    owner: dict[int, int] = {}
    labels: dict[str, set[int]] = {}
    raw_tr: list[tuple[int, str, list[tuple[int, float]], int]] = []
    srew: dict[str, dict[int, float]] = {}
    arew: dict[str, list[tuple[int, str, float, int]]] = {}

    def fail(lineno, msg):
        raise ModelError(f"line {lineno}: {msg}")

    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("//", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kw = tok[0]
        try:
            if kw == "tsg":
                n, np_ = int(tok[1]), int(tok[2])
            elif n is None:
                fail(lineno, "expected header 'tsg <nstates> <nplayers>'")
            elif kw == "player":
                players[int(tok[1]) - 1] = tok[2]
            elif kw == "init":
                init = int(tok[1])
            elif kw == "state":
                s, p = int(tok[1]), int(tok[2]) - 1
                if s in owner:
                    fail(lineno, f"state {s} declared twice")
                owner[s] = p
                for lab in tok[3:]:
                    labels.setdefault(lab, set()).add(s)
            elif kw == "tr":
                s, act = int(tok[1]), tok[2]
                dist = []
                for item in tok[3:]:
                    t, p = item.split(":")
                    dist.append((int(t), float(p)))
                if not dist:
                    fail(lineno, "transition without successors")
                raw_tr.append((s, act, dist, lineno))
            elif kw == "srew":
                srew.setdefault(tok[1], {})[int(tok[2])] = float(tok[3])
            elif kw == "arew":
                arew.setdefault(tok[1], []).append((int(tok[2]), tok[3], float(tok[4]), lineno))
            else:
                fail(lineno, f"unknown keyword {kw!r}")
        except (IndexError, ValueError):
            fail(lineno, f"malformed {kw!r} line")
    if n is None:
        raise ModelError("missing header 'tsg <nstates> <nplayers>'")
    actions = tuple(sorted({a for _, a, _, _ in raw_tr}))
    rank = {a: i for i, a in enumerate(actions)}
    delta = {}
    for s, act, dist, lineno in raw_tr:
        key = (s, rank[act])
        if key in delta:
            fail(lineno, f"state {s} action {act} defined twice")
        merged: dict[int, float] = {}
        for t, p in dist:
            merged[t] = merged.get(t, 0.0) + p
        delta[key] = tuple(sorted(merged.items()))
    rewards = {}
    for name in sorted(set(srew) | set(arew)):
        ar = {}
        for s, act, v, lineno in arew.get(name, []):
            if act not in rank:
                fail(lineno, f"reward on unknown action {act!r}")
            ar[(s, rank[act])] = v
        rewards[name] = RewardStructure(dict(srew.get(name, {})), ar)
    missing = [s for s in range(n) if s not in owner]
    if missing:
        raise ModelError(f"states without an owner: {missing[:10]}")
    game = ExplicitTsg(
        players=tuple(players.get(i, f"p{i + 1}") for i in range(np_)),
        state_vars=("s",),
        states=tuple((s,) for s in range(n)),
        owner=tuple(owner[s] for s in range(n)),
        init=init,
        actions=actions,
        delta=dict(sorted(delta.items())),
        labels={k: frozenset(v) for k, v in labels.items()},
        rewards=rewards,
    )
    diags = validate(game)
    if diags:
        raise ModelError("invalid game", diags)
    return game
