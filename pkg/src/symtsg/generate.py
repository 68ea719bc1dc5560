"""Random games and queries for differential testing."""

from __future__ import annotations

import random
from collections.abc import Sequence

from .logic import (
    And,
    Atom,
    Bound,
    Cumulative,
    Instant,
    Next,
    Not,
    Objective,
    Nash,
    ReachReward,
    TrueF,
    Until,
    ZeroSumP,
    ZeroSumR,
)
from .model import ExplicitTsg, RewardStructure

__all__ = ["random_game", "random_nash_query", "random_query", "random_tsg_source"]


def _distribution(rng: random.Random, succs: Sequence[int]) -> tuple[tuple[int, float], ...]:
    weights = [rng.randint(1, 9) for _ in succs]
    total = sum(weights)
    return tuple((t, w / total) for t, w in zip(succs, weights))


def random_game(
    rng: random.Random,
    n_states: int,
    *,
    n_players: int = 2,
    n_actions: int = 3,
    max_succ: int = 3,
    absorbing: float = 0.1,
    target_frac: float = 0.15,
) -> ExplicitTsg:
    """A random game in which every state is reachable from state 0.

    Labels ``a`` and ``b`` are random state sets (``a`` usually small, as a
    target); reward ``r`` has state rewards in [1, 4] and occasional action
    rewards.
    """
    names = tuple(f"p{i + 1}" for i in range(n_players))
    actions = tuple(f"act{i}" for i in range(n_actions))
    owner = tuple(rng.randrange(n_players) for _ in range(n_states))
    delta: dict[tuple[int, int], tuple[tuple[int, float], ...]] = {}
    for s in range(n_states):
        if s > 0 and rng.random() < absorbing:
            delta[(s, rng.randrange(n_actions))] = ((s, 1.0),)
            continue
        k = rng.randint(1, n_actions)
        for a in sorted(rng.sample(range(n_actions), k)):
            m = rng.randint(1, min(max_succ, n_states))
            succs = sorted(rng.sample(range(n_states), m))
            delta[(s, a)] = _distribution(rng, succs)
    # a spanning tree from state 0 keeps every state reachable
    for t in range(1, n_states):
        parent = rng.randrange(t)
        keys = [k for k in delta if k[0] == parent]
        key = rng.choice(keys)
        dist = dict(delta[key])
        if t not in dist:
            succs = sorted(set(dist) | {t})
            delta[key] = _distribution(rng, succs)
    a = frozenset(s for s in range(n_states) if rng.random() < target_frac) or frozenset({n_states - 1})
    b = frozenset(s for s in range(n_states) if rng.random() < 0.6)
    srew = {s: float(rng.randint(1, 4)) for s in range(n_states)}
    arew = {k: float(rng.randint(1, 3)) for k in delta if rng.random() < 0.3}
    return ExplicitTsg(
        players=names,
        state_vars=("s",),
        states=tuple((s,) for s in range(n_states)),
        owner=owner,
        init=0,
        actions=actions,
        delta=delta,
        labels={"a": a, "b": b},
        rewards={"r": RewardStructure(srew, arew)},
    )


def _coalition(rng: random.Random, players: Sequence[str]) -> tuple[str, ...]:
    n = len(players)
    roll = rng.random()
    if roll < 0.05:
        return ()
    if roll < 0.1:
        return tuple(players)
    k = rng.randint(1, n - 1)
    chosen = set(rng.sample(list(players), k))
    return tuple(p for p in players if p in chosen)


def random_query(rng: random.Random, players: Sequence[str], *, numeric: bool = True):
    """A random zero-sum query over labels ``a``/``b`` and reward ``r``."""
    c = _coalition(rng, players)
    opt = rng.choice(["max", "min"]) if numeric else None
    bound = None
    if not numeric:
        bound = Bound(rng.choice(["<", "<=", ">=", ">"]), rng.choice([0.0, 0.25, 0.5, 0.9, 1.0]))
    a, b = Atom("a"), Atom("b")
    kind = rng.choice(["F", "U", "Uk", "X", "G", "C", "I", "R"])
    if kind in ("C", "I", "R"):
        if kind == "C":
            rho = Cumulative(rng.randint(0, 6))
        elif kind == "I":
            rho = Instant(rng.randint(0, 6))
        else:
            rho = ReachReward(a)
        if bound is not None:
            bound = Bound(bound.op, bound.value * 10)
        return ZeroSumR(c, "r", rho, bound, opt)
    if kind == "F":
        path = Until(TrueF(), a)
    elif kind == "U":
        path = Until(b, a)
    elif kind == "Uk":
        path = Until(rng.choice([TrueF(), b]), a, rng.randint(0, 6))
    elif kind == "X":
        path = Next(rng.choice([a, b, And(a, b)]))
    else:
        # G phi is stored as F !phi with the direction inverted
        path = Until(TrueF(), Not(b), rng.choice([None, None, rng.randint(0, 5)]), negated=True)
    return ZeroSumP(c, path, bound, opt)


def random_nash_query(rng: random.Random, players: Sequence[str], labels=("a", "b")) -> Nash:
    """Two-coalition SWNE query with reachability objectives."""
    n = len(players)
    k = rng.randint(1, n - 1)
    first = set(rng.sample(list(players), k))
    c1 = tuple(p for p in players if p in first)
    c2 = tuple(p for p in players if p not in first)
    objs = (Objective("P", Until(TrueF(), Atom(labels[0]))), Objective("P", Until(TrueF(), Atom(labels[1]))))
    return Nash((c1, c2), "max", objs, None)


def random_tsg_source(rng: random.Random) -> str:
    """A small random model in the guarded-command language."""
    nplayers = rng.randint(2, 3)
    nmods = rng.randint(1, 2)
    lines = ["tsg", ""]
    mods = []
    for m in range(nmods):
        hi = rng.randint(1, 3)
        mods.append((f"m{m}", f"v{m}", hi))
    acts = [f"a{i}" for i in range(nplayers + rng.randint(0, 1))]
    # each action belongs to one player; the turn variable decides who moves
    owner = {a: i % nplayers for i, a in enumerate(acts)}
    for p in range(nplayers):
        mine = [f"[{a}]" for a in acts if owner[a] == p]
        lines.append(f"player p{p + 1} {', '.join(mine)} endplayer".replace("  ", " "))
    lines.append("")
    lines.append("module turn")
    lines.append(f"  t : [0..{nplayers - 1}] init 0;")
    for a in acts:
        p = owner[a]
        lines.append(f"  [{a}] t={p} -> (t'={(p + 1) % nplayers});")
    lines.append("endmodule")
    for name, var, hi in mods:
        lines.append("")
        lines.append(f"module {name}")
        lines.append(f"  {var} : [0..{hi}] init 0;")
        for a in acts:
            if rng.random() < 0.7:
                lo_val = rng.randint(0, hi)
                guard = f"{var}>={lo_val}" if rng.random() < 0.5 else "true"
                t1 = rng.randint(0, hi)
                t2 = rng.randint(0, hi)
                p = rng.choice(["0.5", "0.25", "0.3", "0.9"])
                lines.append(f"  [{a}] {guard} -> {p}:({var}'={t1}) + 1-{p}:({var}'={t2});")
                if guard != "true":
                    lines.append(f"  [{a}] {var}<{lo_val} -> ({var}'=min({var}+1,{hi}));")
        lines.append("endmodule")
    lines.append("")
    lines.append(f'label "top" = {mods[0][1]}={mods[0][2]};')
    lines.append('rewards "r"')
    lines.append("  true : 1;")
    if acts:
        lines.append(f"  [{acts[0]}] true : 2;")
    lines.append("endrewards")
    return "\n".join(lines) + "\n"
