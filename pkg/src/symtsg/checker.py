"""Symbolic model checking of zero-sum and two-coalition Nash properties.

All sets are BDDs over the row variables ``x`` and all value vectors are
MTBDDs over ``x``. Rows of the transition diagram are indexed by
``(w, z, x)``: the owning player's one-hot code, the action rank and the
source state.
"""

from __future__ import annotations

import math
import time
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any

from .logic import (
    And,
    Atom,
    Bound,
    Cumulative,
    FalseF,
    Instant,
    Nash,
    Next,
    Not,
    Objective,
    Or,
    ReachReward,
    TrueF,
    Until,
    ZeroSumP,
    ZeroSumR,
)
from .model import Coalition, ModelError, SymbolicTsg, from_bits, to_bits
from .mtbdd import Bdd, Manager, Mtbdd

__all__ = [
    "CheckError",
    "CheckResult",
    "ConvergenceError",
    "SolverConfig",
    "StrategyBdd",
    "bounded_until",
    "check",
    "nash_2",
    "next_op",
    "prob0",
    "prob1",
    "reward_ops",
    "threshold_sat",
    "value_iter_reach",
]

INF = math.inf


class CheckError(Exception):
    """Unsupported or ill-posed query."""


class ConvergenceError(CheckError):
    """Value iteration hit ``max_iters`` before the stopping criterion held."""

    def __init__(self, iterations: int, sup_norm: float, trace: list[float]):
        super().__init__(f"no convergence after {iterations} iterations (last sup-norm {sup_norm:.3g})")
        self.iterations = iterations
        self.sup_norm = sup_norm
        self.trace = trace


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-6
    max_iters: int = 100_000
    relative: bool = True
    tie_break: str = "keep-all"  # or "lexicographic-least"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tie_break not in ("keep-all", "lexicographic-least"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")

    @property
    def strategy_tol(self) -> float:
        return max(10 * self.epsilon, 1e-12)


@dataclass
class StrategyBdd:
    """Chosen actions as a BDD over ``(x, z')`` for one coalition."""

    bdd: Bdd
    coalition: frozenset[int]
    sym: SymbolicTsg = field(repr=False)

    def size(self) -> int:
        return self.sym.manager.node_count(self.bdd)

    def as_map(self) -> dict[int, set[str]]:
        """Reachable state index -> chosen action names."""
        sym = self.sym
        idx = sym.code_index
        out: dict[int, set[str]] = {}
        for bits, _ in sym.manager.minterms(self.bdd, sym.x + sym.zp):
            k = len(sym.x)
            s = idx.get(from_bits(bits[:k]))
            rank = from_bits(bits[k:]) if sym.zp else 0
            if s is not None and rank < len(sym.actions):
                out.setdefault(s, set()).add(sym.actions[rank])
        return out

    def to_text(self) -> str:
        sym = self.sym
        names = sym.state_var_names
        lines = []
        for s, acts in sorted(self.as_map().items()):
            val = sym.valuation(sym.codes[s])
            lhs = ",".join(f"{n}={_fmt(v)}" for n, v in zip(names, val))
            lines.append(f"({lhs}) -> {' '.join(sorted(acts, key=sym.actions.index))}")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_dot(self) -> str:
        return self.sym.manager.to_dot(self.bdd)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


@dataclass
class CheckResult:
    formula: Any
    sat: Bdd | None = None
    values: Mtbdd | None = None
    strategy: StrategyBdd | None = None
    opponent_strategy: StrategyBdd | None = None
    coalition_values: tuple[Mtbdd, Mtbdd] | None = None
    init_value: Any = None
    stats: dict = field(default_factory=dict)

    def vector(self, sym: SymbolicTsg):
        """Dense values (or 0/1 satisfaction) in reachable-state order."""
        return sym.to_vector(self.values if self.values is not None else self.sat)


# ----------------------------------------------------------------------
# helpers


def _members(c) -> frozenset[int]:
    if isinstance(c, Coalition):
        return c.members
    return frozenset(c)


def _close(mgr: Manager, a: Mtbdd, b: Mtbdd, tol: float) -> Bdd:
    """``|a - b| <= tol * max(1, |b|)`` pointwise (infinities equal only to themselves)."""

    def f(u: float, v: float) -> float:
        if u == v:
            return 1.0
        if math.isinf(u) or math.isinf(v):
            return 0.0
        return 1.0 if abs(u - v) <= tol * max(1.0, abs(v)) else 0.0

    return mgr.as_bdd(mgr.apply_fn(f, a, b, key=("close", tol)))


def _value_at(sym: SymbolicTsg, m: Mtbdd, index: int) -> float:
    bits = to_bits(sym.codes[index], len(sym.x))
    return sym.manager.evaluate(m, dict(zip(sym.x, bits)))


def _succ_rows(sym: SymbolicTsg, target: Bdd) -> Bdd:
    """Rows ``(w, z, x)`` with at least one successor in ``target``."""
    mgr = sym.manager
    ty = mgr.replace_vars(target, sym.x, sym.y)
    return mgr.exists(sym.y, mgr.and_(sym.trans01, ty))


class _Sides:
    """Rows and states of the maximising players and of the rest."""

    def __init__(self, sym: SymbolicTsg, cmax: Bdd):
        mgr = sym.manager
        self.sym = sym
        self.cmax = cmax
        self.cmin = mgr.and_(mgr.disjoin(sym.player_cubes), mgr.not_(cmax))
        self.rows_max = mgr.and_(sym.rows, cmax)
        self.rows_min = mgr.and_(sym.rows, self.cmin)
        wz = sym.w + sym.z
        self.smax = mgr.and_(mgr.exists(wz, self.rows_max), sym.reach)
        self.smin = mgr.and_(mgr.exists(wz, self.rows_min), sym.reach)

    @classmethod
    def of(cls, sym: SymbolicTsg, max_players: Iterable[int]) -> _Sides:
        return cls(sym, sym.coalition_cube(sorted(max_players)))

    def max_players(self) -> frozenset[int]:
        mgr = self.sym.manager
        return frozenset(i for i, c in enumerate(self.sym.player_cubes) if not mgr.and_(c, self.cmax).is_false)

    def min_players(self) -> frozenset[int]:
        return frozenset(range(len(self.sym.players))) - self.max_players()


# ----------------------------------------------------------------------
# qualitative precomputation


def prob0(stay: Bdd, target: Bdd, p_max: Bdd, sym: SymbolicTsg) -> Bdd:
    """States where the maximisers (cube ``p_max``) cannot reach ``target`` via ``stay``."""
    return _prob0(sym, _Sides(sym, p_max), stay, target)


def _prob0(sym: SymbolicTsg, sides: _Sides, stay: Bdd, target: Bdd) -> Bdd:
    mgr = sym.manager
    wz = sym.w + sym.z
    x = mgr.and_(target, sym.reach)
    stay = mgr.and_(stay, sym.reach)
    while True:
        pre = _succ_rows(sym, x)
        some = mgr.exists(wz, mgr.and_(sides.rows_max, pre))
        every = mgr.and_(sides.smin, mgr.not_(mgr.exists(wz, mgr.and_(sides.rows_min, mgr.not_(pre)))))
        nx = mgr.or_(x, mgr.and_(stay, mgr.or_(some, every)))
        if nx == x:
            return mgr.and_(sym.reach, mgr.not_(x))
        x = nx


def prob1(stay: Bdd, target: Bdd, p_max: Bdd, sym: SymbolicTsg) -> Bdd:
    """States where the maximisers (cube ``p_max``) can reach ``target`` via ``stay`` almost surely."""
    return _prob1(sym, _Sides(sym, p_max), stay, target)[0]


def _prob1(sym: SymbolicTsg, sides: _Sides, stay: Bdd, target: Bdd, *, escape: bool = False):
    """Almost-sure set plus witness rows for the maximisers.

    A witness row at a state added in inner round ``i`` keeps the play inside
    the set and has a successor added before round ``i``, so following any
    witness makes progress towards the target.

    With ``escape``, also returns rows over ``(z, x)`` for the minimisers
    outside the set: at a state dropped in outer round ``i``, a row that
    either reaches a state dropped earlier or stays among the states dropped
    in round ``i``. Following them keeps the chance of missing the target
    positive.
    """
    mgr = sym.manager
    wz = sym.w + sym.z
    target = mgr.and_(target, sym.reach)
    stay = mgr.and_(stay, sym.reach)
    y = sym.reach
    esc = mgr.false
    while True:
        outside = _succ_rows(sym, mgr.and_(sym.reach, mgr.not_(y)))
        inside = mgr.and_(sym.rows, mgr.not_(outside))
        x = target
        witness = mgr.false
        while True:
            good = mgr.and_(inside, _succ_rows(sym, x))
            gmax = mgr.and_(sides.rows_max, good)
            some = mgr.exists(wz, gmax)
            every = mgr.and_(sides.smin, mgr.not_(mgr.exists(wz, mgr.and_(sides.rows_min, mgr.not_(good)))))
            nx = mgr.or_(x, mgr.and_(stay, mgr.or_(some, every)))
            new = mgr.and_(nx, mgr.not_(x))
            if new.is_false:
                break
            witness = mgr.or_(witness, mgr.and_(gmax, new))
            x = nx
        if x == y:
            return (y, witness, esc) if escape else (y, witness)
        if escape:
            dropped = mgr.and_(y, mgr.not_(x))
            within = mgr.not_(_succ_rows(sym, mgr.and_(sym.reach, mgr.not_(dropped))))
            rows = mgr.and_(mgr.and_(sides.rows_min, dropped), mgr.or_(outside, within))
            esc = mgr.or_(esc, mgr.exists(sym.w, rows))
        y = x


# ----------------------------------------------------------------------
# numerical iteration


class _Backup:
    """One Bellman backup restricted to the rows of ``maybe`` states."""

    def __init__(self, sym: SymbolicTsg, sides: _Sides, maybe: Bdd, srew: Mtbdd | None = None, arew: Mtbdd | None = None):
        mgr = sym.manager
        self.sym, self.sides, self.maybe = sym, sides, maybe
        trans = mgr.apply("*", sym.trans, maybe)
        # Summing the owner's one-hot block out once is the same as doing it
        # after every product, since each row belongs to exactly one player.
        self.tmax = mgr.abstract("+", sym.w, mgr.apply("*", trans, sides.cmax))
        self.tmin = mgr.abstract("+", sym.w, mgr.apply("*", trans, sides.cmin))
        self.en_max = mgr.and_(mgr.exists(sym.w, sides.rows_max), maybe)
        self.en_min = mgr.and_(mgr.exists(sym.w, sides.rows_min), maybe)
        self.own_min = mgr.exists(sym.z, self.en_min)
        self.inf_min = mgr.if_then_else(self.en_min, mgr.const(0.0), mgr.const(INF))
        self.srew = None if srew is None else mgr.apply("*", srew, maybe)
        if arew is None:
            self.amax = self.amin = None
        else:
            a = mgr.apply("*", arew, maybe)
            self.amax = mgr.abstract("+", sym.w, mgr.apply("*", a, sides.rows_max))
            self.amin = mgr.abstract("+", sym.w, mgr.apply("*", a, sides.rows_min))

    def action_values(self, v: Mtbdd) -> tuple[Mtbdd, Mtbdd]:
        """Per-(z, x) backups for the max rows and the min rows."""
        mgr, sym = self.sym.manager, self.sym
        qmax = mgr.mv_mult(self.tmax, v, sym.y)
        qmin = mgr.mv_mult(self.tmin, v, sym.y)
        if self.amax is not None:
            qmax = mgr.apply("+", qmax, self.amax)
            qmin = mgr.apply("+", qmin, self.amin)
        return qmax, qmin

    def __call__(self, v: Mtbdd) -> Mtbdd:
        mgr, sym = self.sym.manager, self.sym
        qmax, qmin = self.action_values(v)
        hi = mgr.abstract("max", sym.z, qmax)
        lo = mgr.abstract("min", sym.z, mgr.apply("+", qmin, self.inf_min))
        lo = mgr.if_then_else(self.own_min, lo, mgr.const(0.0))
        r = mgr.apply("+", hi, lo)
        if self.srew is not None:
            r = mgr.apply("+", r, self.srew)
        return r


def _iterate(sym: SymbolicTsg, backup: _Backup, fixed: Mtbdd, start: Mtbdd, cfg: SolverConfig, stats: dict, kind: str) -> Mtbdd:
    """Iterate ``v <- fixed + backup(v)`` until the sup-norm criterion holds."""
    mgr = sym.manager
    v = start
    trace: list[float] = []
    monotone = True
    t0 = time.perf_counter()
    for it in range(1, cfg.max_iters + 1):
        new = mgr.apply("+", fixed, backup(v))
        if monotone and not mgr.and_(mgr.apply("<", new, v), sym.reach).is_false:
            monotone = False
        d = mgr.sup_norm(new, v, relative=cfg.relative)
        trace.append(d)
        v = new
        if d < cfg.epsilon:
            _record(stats, kind, it, d, monotone, True, time.perf_counter() - t0)
            return v
    _record(stats, kind, cfg.max_iters, trace[-1], monotone, False, time.perf_counter() - t0)
    raise ConvergenceError(cfg.max_iters, trace[-1], trace[-20:])


def _record(stats: dict, kind: str, iterations: int, sup_norm: float, monotone: bool, converged: bool, seconds: float):
    stats.setdefault("runs", []).append(
        {"kind": kind, "iterations": iterations, "sup_norm": sup_norm, "monotone": monotone, "converged": converged}
    )
    stats["iterations"] = stats.get("iterations", 0) + iterations
    stats["quant_time"] = stats.get("quant_time", 0.0) + seconds


def _to_z_prime(sym: SymbolicTsg, rows_zx: Bdd) -> Bdd:
    mgr = sym.manager
    return mgr.as_bdd(mgr.replace_vars(rows_zx, sym.z, sym.zp))


def _progress_filter(sym: SymbolicTsg, sides: _Sides, base: Bdd, opt_max: Bdd, region: Bdd) -> Bdd:
    """Restrict optimal max actions (over ``(z, x)``) to ones that move closer to ``base``.

    States join in layers: a max state once one of its optimal actions has a
    successor in an earlier layer (and only those actions are kept), a min
    state once any of its actions does. States that never join keep all
    their optimal actions.
    """
    mgr = sym.manager
    en_min = mgr.exists(sym.w, sides.rows_min)
    x = base
    kept = mgr.false
    todo = region
    while True:
        pre = mgr.exists(sym.w, _succ_rows(sym, x))  # (z, x)
        step_max = mgr.and_(mgr.and_(opt_max, pre), todo)
        new_max = mgr.exists(sym.z, step_max)
        new_min = mgr.and_(mgr.exists(sym.z, mgr.and_(en_min, pre)), todo)
        new = mgr.or_(new_max, new_min)
        if new.is_false:
            break
        kept = mgr.or_(kept, step_max)
        x = mgr.or_(x, new)
        todo = mgr.and_(todo, mgr.not_(new))
    leftover = mgr.and_(opt_max, todo)
    return mgr.or_(kept, leftover)


def _strategy(sym: SymbolicTsg, rows_zx: Bdd, players: frozenset[int], cfg: SolverConfig) -> StrategyBdd:
    mgr = sym.manager
    b = _to_z_prime(sym, rows_zx)
    if cfg.tie_break == "lexicographic-least" and sym.zp:
        b = mgr.pick_least(b, sym.zp)
    return StrategyBdd(b, players, sym)


def _reach(sym: SymbolicTsg, sides: _Sides, target: Bdd, stay: Bdd, cfg: SolverConfig, stats: dict):
    """Reachability values with max- and min-side optimal rows over ``(z, x)``."""
    mgr = sym.manager
    t0 = time.perf_counter()
    s0 = _prob0(sym, sides, stay, target)
    s1, witness = _prob1(sym, sides, stay, target)
    maybe = mgr.and_(sym.reach, mgr.not_(mgr.or_(s0, s1)))
    stats["qual_time"] = stats.get("qual_time", 0.0) + time.perf_counter() - t0
    stats["prob0"] = len(sym.to_set(s0))
    stats["prob1"] = len(sym.to_set(s1))
    stats["maybe"] = len(sym.to_set(maybe))
    one = mgr.as_bdd(s1)
    backup = _Backup(sym, sides, maybe)
    if maybe.is_false:
        sol = one
        _record(stats, "reach", 0, 0.0, True, True, 0.0)
    else:
        sol = _iterate(sym, backup, one, one, cfg, stats, "reach")
    qmax, qmin = backup.action_values(sol)
    tol = cfg.strategy_tol
    opt_max = mgr.and_(_close(mgr, qmax, sol, tol), backup.en_max)
    opt_max = _progress_filter(sym, sides, s1, opt_max, maybe)
    wit = mgr.exists(sym.w, mgr.and_(witness, mgr.not_(mgr.and_(target, sym.reach))))
    max_rows = mgr.or_(opt_max, wit)
    opt_min = mgr.and_(_close(mgr, qmin, sol, tol), backup.en_min)
    stay0 = mgr.and_(mgr.exists(sym.w, sides.rows_min), mgr.not_(mgr.exists(sym.w, _succ_rows(sym, mgr.and_(sym.reach, mgr.not_(s0))))))
    min_rows = mgr.or_(opt_min, mgr.and_(stay0, s0))
    return sol, max_rows, min_rows, s0, s1


def value_iter_reach(sym: SymbolicTsg, C, target: Bdd, stay: Bdd, cfg: SolverConfig | None = None, *, stats: dict | None = None):
    """Values of ``stay U target`` with coalition ``C`` maximising, plus its strategy."""
    cfg = cfg or SolverConfig()
    members = _members(C)
    sides = _Sides.of(sym, members)
    sol, max_rows, _, _, _ = _reach(sym, sides, target, stay, cfg, {} if stats is None else stats)
    return sol, _strategy(sym, max_rows, members, cfg)


def _steps(sym: SymbolicTsg, backup: _Backup, fixed: Mtbdd, start: Mtbdd, k: int, stats: dict, kind: str) -> Mtbdd:
    mgr = sym.manager
    t0 = time.perf_counter()
    v = start
    monotone = True
    for _ in range(k):
        new = mgr.apply("+", fixed, backup(v))
        if monotone and not mgr.and_(mgr.apply("<", new, v), sym.reach).is_false:
            monotone = False
        v = new
    _record(stats, kind, k, 0.0, monotone, True, time.perf_counter() - t0)
    return v


def bounded_until(sym: SymbolicTsg, C, phi1: Bdd, phi2: Bdd, k: int, *, stats: dict | None = None) -> Mtbdd:
    """``phi1 U<=k phi2`` with coalition ``C`` maximising."""
    return _bounded_until(sym, _Sides.of(sym, _members(C)), phi1, phi2, k, {} if stats is None else stats)


def _bounded_until(sym, sides, phi1, phi2, k, stats):
    if k < 0:
        raise CheckError("step bound must be non-negative")
    mgr = sym.manager
    goal = mgr.and_(phi2, sym.reach)
    maybe = mgr.and_(mgr.and_(phi1, sym.reach), mgr.not_(goal))
    return _steps(sym, _Backup(sym, sides, maybe), goal, goal, k, stats, "bounded")


def next_op(sym: SymbolicTsg, C, phi: Bdd) -> Mtbdd:
    """``X phi`` with coalition ``C`` maximising."""
    return _next(sym, _Sides.of(sym, _members(C)), phi)


def _next(sym, sides, phi):
    mgr = sym.manager
    ind = mgr.and_(phi, sym.reach)
    return _Backup(sym, sides, sym.reach)(ind)


def _reward_pair(sym: SymbolicTsg, name: str) -> tuple[Mtbdd, Mtbdd]:
    try:
        return sym.reward_mtbdds[name]
    except KeyError:
        raise CheckError(f"unknown reward structure {name!r}") from None


def reward_ops(sym: SymbolicTsg, C, r: str, rho, cfg: SolverConfig | None = None, *, stats: dict | None = None):
    """Reward objective ``rho`` with coalition ``C`` maximising; returns (values, strategy or None).

    ``rho`` is an ``Instant``/``Cumulative`` formula or a ``ReachReward``
    whose target has already been evaluated to a BDD.
    """
    cfg = cfg or SolverConfig()
    members = _members(C)
    sides = _Sides.of(sym, members)
    vals, max_rows, _ = _reward(sym, sides, r, rho, cfg, {} if stats is None else stats)
    return vals, (None if max_rows is None else _strategy(sym, max_rows, members, cfg))


def _reward(sym: SymbolicTsg, sides: _Sides, r: str, rho, cfg: SolverConfig, stats: dict):
    mgr = sym.manager
    srew, arew = _reward_pair(sym, r)
    zero = mgr.const(0.0)
    if isinstance(rho, Instant):
        start = mgr.apply("*", srew, sym.reach)
        return _steps(sym, _Backup(sym, sides, sym.reach), zero, start, rho.k, stats, "instant"), None, None
    if isinstance(rho, Cumulative):
        backup = _Backup(sym, sides, sym.reach, srew, arew)
        return _steps(sym, backup, zero, zero, rho.k, stats, "cumulative"), None, None
    target = rho.target if isinstance(rho, ReachReward) else rho
    if not isinstance(target, Bdd):
        raise CheckError("reachability reward target must be a state set")
    target = mgr.and_(target, sym.reach)
    t0 = time.perf_counter()
    # finite iff the reward minimisers can force the target almost surely
    mins = _Sides(sym, sides.cmin)
    fin, _, escape = _prob1(sym, mins, sym.reach, target, escape=True)
    inf = mgr.and_(sym.reach, mgr.not_(fin))
    maybe = mgr.and_(fin, mgr.not_(target))
    stats["qual_time"] = stats.get("qual_time", 0.0) + time.perf_counter() - t0
    stats["infinite"] = len(sym.to_set(inf))
    stats["maybe"] = len(sym.to_set(maybe))
    fixed = mgr.if_then_else(inf, mgr.const(INF), zero)
    backup = _Backup(sym, sides, maybe, srew, arew)
    if maybe.is_false:
        sol = fixed
        _record(stats, "reward", 0, 0.0, True, True, 0.0)
    else:
        sol = _iterate(sym, backup, fixed, fixed, cfg, stats, "reward")
    qmax, qmin = backup.action_values(sol)
    tol = cfg.strategy_tol
    # the state reward is common to all actions, so compare without it
    base = mgr.apply("-", sol, mgr.apply("*", srew, maybe)) if not maybe.is_false else sol
    base = mgr.if_then_else(maybe, base, zero)
    max_rows = mgr.and_(_close(mgr, qmax, base, tol), backup.en_max)
    min_rows = mgr.and_(_close(mgr, qmin, base, tol), backup.en_min)
    # where the value is infinite, the maximisers keep the target at bay
    max_rows = mgr.or_(max_rows, escape)
    return sol, max_rows, min_rows


def threshold_sat(values: Mtbdd, op: str, bound: float, reach: Bdd) -> Bdd:
    """Reachable states whose value satisfies ``value op bound`` (exact comparison)."""
    mgr = values.manager
    return mgr.and_(mgr.threshold(values, op, bound), reach)


# ----------------------------------------------------------------------
# Nash equilibria


def _nash_objective(sym: SymbolicTsg, obj: Objective, sat) -> dict:
    """Pinned values and backup data for one Nash objective."""
    mgr = sym.manager
    f = obj.formula
    if obj.kind == "P":
        if not isinstance(f, Until) or f.k is not None or f.negated:
            raise CheckError("Nash objectives support unbounded reachability/until probabilities only")
        target = mgr.and_(sat(f.right), sym.reach)
        stay = mgr.and_(sat(f.left), sym.reach)
        dead = mgr.and_(sym.reach, mgr.not_(mgr.or_(target, stay)))
        return {"kind": "P", "pin": mgr.or_(target, dead), "pinval": mgr.as_bdd(target), "srew": None, "arew": None}
    if not isinstance(f, ReachReward):
        raise CheckError("Nash reward objectives support reachability rewards (F) only")
    target = mgr.and_(sat(f.target), sym.reach)
    nobody = _Sides(sym, mgr.false)
    sure, _ = _prob1(sym, nobody, sym.reach, target)
    if sure != sym.reach:
        raise CheckError("Nash reward objectives need the target reached almost surely under every profile")
    srew, arew = _reward_pair(sym, obj.reward)
    return {"kind": "R", "pin": target, "pinval": mgr.const(0.0), "srew": srew, "arew": arew}


def nash_2(sym: SymbolicTsg, C1, C2, objectives, opt: str = "max", cfg: SolverConfig | None = None, *, sat=None, stats: dict | None = None):
    """Social-welfare (``opt="max"``) or social-cost (``"min"``) equilibrium by backward induction.

    Returns ``((values_1, values_2), profile)``. Objective targets are given
    either as ``Objective`` formulas (with ``sat`` evaluating state formulas)
    or are resolved from labels when ``sat`` is omitted.
    """
    cfg = cfg or SolverConfig()
    stats = {} if stats is None else stats
    mgr = sym.manager
    c1, c2 = _members(C1), _members(C2)
    n = len(sym.players)
    if c1 & c2 or c1 | c2 != frozenset(range(n)) or not c1 or not c2:
        raise CheckError("Nash coalitions must partition the players")
    if opt not in ("max", "min"):
        raise CheckError(f"unknown optimisation {opt!r}")
    if sat is None:
        sat = lambda phi: _sat_simple(sym, phi)
    objs = [_nash_objective(sym, o, sat) for o in objectives]
    if len(objs) != 2:
        raise CheckError("exactly two objectives are required")
    sign = 1.0 if opt == "max" else -1.0

    trans = sym.trans
    own1 = sym.owned_states(c1)
    enabled = mgr.and_(sym.enabled, sym.reach)  # (z, x)
    cube1 = sym.coalition_cube(sorted(c1))
    minus_inf = mgr.const(-INF)
    zero = mgr.const(0.0)
    neg = mgr.const(sign)
    tol = cfg.strategy_tol
    t = mgr.abstract("+", sym.w, trans)
    pieces = []
    for o in objs:
        a = None
        if o["arew"] is not None:
            a = mgr.abstract("+", sym.w, mgr.apply("*", o["arew"], sym.rows))
        pieces.append((t, a))
    # backups of a pinned objective are its pinned value for every action
    pinned_rows = [mgr.if_then_else(o["pin"], mgr.apply("*", o["pinval"], enabled), zero) for o in objs]

    def backups(vs):
        out = []
        for o, (t, a), pr, v in zip(objs, pieces, pinned_rows, vs):
            q = mgr.mv_mult(t, v, sym.y)
            if a is not None:
                q = mgr.apply("+", q, a)
            if o["srew"] is not None:
                q = mgr.apply("+", q, o["srew"])
            q = mgr.apply("*", q, enabled)
            q = mgr.if_then_else(o["pin"], pr, q)
            out.append(mgr.apply("*", q, neg))  # maximise sign * objective
        return out

    def select(bs, prev=None):
        own = mgr.if_then_else(own1, bs[0], bs[1])
        own = mgr.if_then_else(enabled, own, minus_inf)
        best = mgr.abstract("max", sym.z, own)
        ok = mgr.and_(_close(mgr, own, best, tol), enabled)
        total = mgr.if_then_else(ok, mgr.apply("+", bs[0], bs[1]), minus_inf)
        best_total = mgr.abstract("max", sym.z, total)
        chosen = mgr.and_(_close(mgr, total, best_total, tol), ok)
        if prev is not None:
            # keep a still-optimal previous choice so near-ties cannot oscillate
            keep = mgr.and_(chosen, prev)
            chosen = mgr.or_(keep, mgr.and_(chosen, mgr.not_(mgr.exists(sym.z, keep))))
        return _lex_least_z(sym, chosen)

    def apply_choice(chosen, bs):
        return [mgr.abstract("+", sym.z, mgr.apply("*", b, chosen)) for b in bs]

    start = [mgr.apply("*", mgr.if_then_else(o["pin"], o["pinval"], zero), neg) for o in objs]
    vs = start
    t0 = time.perf_counter()
    trace = []
    it = 0
    chosen = None
    while True:
        it += 1
        if it > cfg.max_iters:
            _record(stats, "nash", cfg.max_iters, trace[-1], False, False, time.perf_counter() - t0)
            raise ConvergenceError(cfg.max_iters, trace[-1], trace[-20:])
        bs = backups(vs)
        chosen = select(bs, chosen)
        new = apply_choice(chosen, bs)
        d = max(mgr.sup_norm(a, b, relative=cfg.relative) for a, b in zip(new, vs))
        trace.append(d)
        vs = new
        if d < cfg.epsilon:
            break
    # freeze the profile, evaluate it precisely and repair local deviations;
    # only states whose owner gains switch, so indifferent owners stay put
    stats["equilibrium_checked"] = False
    for _ in range(50):
        vs = _profile_values(sym, chosen, backups, apply_choice, start, cfg)
        bs = backups(vs)
        own = mgr.if_then_else(own1, bs[0], bs[1])
        own = mgr.if_then_else(enabled, own, minus_inf)
        best = mgr.abstract("max", sym.z, own)
        cur = mgr.abstract("+", sym.z, mgr.apply("*", own, chosen))
        gain = mgr.and_(mgr.not_(_close(mgr, cur, best, tol)), sym.reach)
        if gain.is_false:
            stats["equilibrium_checked"] = True
            break
        chosen = mgr.or_(mgr.and_(chosen, mgr.not_(gain)), mgr.and_(select(bs), gain))
    else:
        vs = _profile_values(sym, chosen, backups, apply_choice, start, cfg)
    _record(stats, "nash", it, trace[-1] if trace else 0.0, False, True, time.perf_counter() - t0)
    vals = tuple(mgr.apply("*", v, neg) for v in vs)
    profile = StrategyBdd(_to_z_prime(sym, chosen), frozenset(range(n)), sym)
    return vals, profile


def _profile_values(sym, chosen, backups, apply_choice, vs, cfg):
    """Values of a fixed profile by iterating its induced chain from the pinned start.

    Starting from the pinned vector (not from the previous iterate) yields
    the least fixpoint, so a profile that cycles away from a target is
    valued at what it actually achieves.
    """
    mgr = sym.manager
    eps = min(cfg.epsilon, 1e-10)
    for _ in range(cfg.max_iters):
        new = apply_choice(chosen, backups(vs))
        d = max(mgr.sup_norm(a, b, relative=cfg.relative) for a, b in zip(new, vs))
        vs = new
        if d < eps:
            return vs
    raise ConvergenceError(cfg.max_iters, d, [])


def _lex_least_z(sym: SymbolicTsg, rows: Bdd) -> Bdd:
    """Keep, per state, only the least action rank among ``rows`` (over ``(z, x)``)."""
    mgr = sym.manager
    for i, zv in enumerate(sym.z):
        bit = mgr.var(zv)
        has0 = mgr.exists(sym.z, mgr.and_(rows, mgr.not_(bit)))
        rows = mgr.and_(rows, mgr.not_(mgr.and_(bit, has0)))
    return rows


# ----------------------------------------------------------------------
# formula dispatch


def _sat_simple(sym: SymbolicTsg, phi) -> Bdd:
    return _Checker(sym, SolverConfig()).sat(phi)


def _coalition(sym: SymbolicTsg, names) -> frozenset[int]:
    try:
        return Coalition.of(sym.players, names).members
    except ModelError as exc:
        raise CheckError(str(exc)) from None


class _Checker:
    def __init__(self, sym: SymbolicTsg, cfg: SolverConfig):
        self.sym = sym
        self.cfg = cfg
        self.stats: dict = {}

    def sat(self, f) -> Bdd:
        sym, mgr = self.sym, self.sym.manager
        if isinstance(f, TrueF):
            return sym.reach
        if isinstance(f, FalseF):
            return mgr.false
        if isinstance(f, Atom):
            if f.name == "init" and "init" not in sym.label_bdds:
                return sym.init
            try:
                return mgr.and_(sym.label(f.name), sym.reach)
            except ModelError as exc:
                raise CheckError(str(exc)) from None
        if isinstance(f, Not):
            return mgr.and_(sym.reach, mgr.not_(self.sat(f.arg)))
        if isinstance(f, And):
            return mgr.and_(self.sat(f.left), self.sat(f.right))
        if isinstance(f, Or):
            return mgr.or_(self.sat(f.left), self.sat(f.right))
        if isinstance(f, (ZeroSumP, ZeroSumR, Nash)):
            if f.bound is None:
                raise CheckError("numeric queries cannot be used as state formulas")
            return self.evaluate(f).sat
        raise CheckError(f"unsupported formula {f!r}")

    def evaluate(self, f) -> CheckResult:
        if isinstance(f, ZeroSumP):
            return self.zero_sum_p(f)
        if isinstance(f, ZeroSumR):
            return self.zero_sum_r(f)
        if isinstance(f, Nash):
            return self.nash(f)
        return CheckResult(f, sat=self.sat(f))

    def _direction(self, f) -> tuple[frozenset[int], bool]:
        """Coalition and whether it maximises."""
        c = _coalition(self.sym, f.coalition)
        if f.opt is not None:
            return c, f.opt == "max"
        return c, f.bound.op in (">", ">=")

    def _finish(self, f, values: Mtbdd, c_max: bool, max_rows, min_rows, c: frozenset[int], tvalues: Mtbdd | None = None) -> CheckResult:
        """Attach strategies and the threshold verdict; ``tvalues`` feeds the bound if given."""
        sym, mgr = self.sym, self.sym.manager
        res = CheckResult(f, values=values, stats=self.stats)
        others = frozenset(range(len(sym.players))) - c
        if max_rows is not None:
            own_rows, opp_rows = (max_rows, min_rows) if c_max else (min_rows, max_rows)
            res.strategy = _strategy(sym, own_rows, c, self.cfg)
            res.opponent_strategy = _strategy(sym, opp_rows, others, self.cfg)
            self.stats["strategy_nodes"] = res.strategy.size()
        if f.bound is not None:
            t = values if tvalues is None else tvalues
            res.sat = threshold_sat(t, f.bound.op, f.bound.value, sym.reach)
            res.init_value = not mgr.and_(res.sat, sym.init).is_false
        else:
            res.init_value = _value_at(sym, values, sym.init_index)
        return res

    def zero_sum_p(self, f: ZeroSumP) -> CheckResult:
        sym, mgr = self.sym, self.sym.manager
        c, c_max = self._direction(f)
        path = f.path
        maxp = c if c_max else frozenset(range(len(sym.players))) - c
        sides = _Sides.of(sym, maxp)
        max_rows = min_rows = None
        if isinstance(path, Next):
            vals = _next(sym, sides, self.sat(path.arg))
        elif path.k is not None:
            vals = _bounded_until(sym, sides, self.sat(path.left), self.sat(path.right), path.k, self.stats)
        else:
            phi1, phi2 = self.sat(path.left), self.sat(path.right)
            qual = self._qualitative(f, sides, phi1, phi2)
            if qual is not None:
                return qual
            vals, max_rows, min_rows, _, _ = _reach(sym, sides, phi2, phi1, self.cfg, self.stats)
        if isinstance(path, Until) and path.negated:
            # stored as F !phi with the bound already inverted; report G phi
            g = mgr.apply("*", mgr.apply("-", mgr.const(1.0), vals), sym.reach)
            return self._finish(f, g, c_max, max_rows, min_rows, c, tvalues=vals)
        return self._finish(f, vals, c_max, max_rows, min_rows, c)

    def _qualitative(self, f: ZeroSumP, sides: _Sides, phi1: Bdd, phi2: Bdd) -> CheckResult | None:
        """Answer bounds 0 and 1 from the graph precomputation alone."""
        b = f.bound
        if b is None or f.path.negated:
            return None
        sym, mgr = self.sym, self.sym.manager
        t0 = time.perf_counter()
        if (b.op, b.value) in ((">", 0.0), ("<=", 0.0)):
            s0 = _prob0(sym, sides, phi1, phi2)
            sat = mgr.and_(sym.reach, mgr.not_(s0)) if b.op == ">" else s0
        elif (b.op, b.value) in ((">=", 1.0), ("<", 1.0)):
            s1, _ = _prob1(sym, sides, phi1, phi2)
            sat = s1 if b.op == ">=" else mgr.and_(sym.reach, mgr.not_(s1))
        else:
            return None
        self.stats["qual_time"] = self.stats.get("qual_time", 0.0) + time.perf_counter() - t0
        self.stats["qualitative"] = True
        res = CheckResult(f, sat=sat, stats=self.stats)
        res.init_value = not mgr.and_(sat, sym.init).is_false
        return res

    def zero_sum_r(self, f: ZeroSumR) -> CheckResult:
        sym = self.sym
        c, c_max = self._direction(f)
        maxp = c if c_max else frozenset(range(len(sym.players))) - c
        sides = _Sides.of(sym, maxp)
        rho = f.formula
        if isinstance(rho, ReachReward):
            rho = self.sat(rho.target)
        vals, max_rows, min_rows = _reward(sym, sides, f.reward, rho, self.cfg, self.stats)
        return self._finish(f, vals, c_max, max_rows, min_rows, c)

    def nash(self, f: Nash) -> CheckResult:
        sym, mgr = self.sym, self.sym.manager
        c1 = _coalition(sym, f.coalitions[0])
        c2 = _coalition(sym, f.coalitions[1])
        (v1, v2), profile = nash_2(sym, c1, c2, f.objectives, f.opt, self.cfg, sat=self.sat, stats=self.stats)
        total = mgr.apply("+", v1, v2)
        res = CheckResult(f, values=total, strategy=profile, coalition_values=(v1, v2), stats=self.stats)
        self.stats["strategy_nodes"] = profile.size()
        if f.bound is not None:
            res.sat = threshold_sat(total, f.bound.op, f.bound.value, sym.reach)
            res.init_value = not mgr.and_(res.sat, sym.init).is_false
        else:
            res.init_value = _value_at(sym, total, sym.init_index)
        return res


def check(f, sym: SymbolicTsg, cfg: SolverConfig | None = None) -> CheckResult:
    """Model check a parsed state formula on the reachable part of ``sym``."""
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    ck = _Checker(sym, cfg)
    res = ck.evaluate(f)
    res.stats = ck.stats
    ck.stats["total_time"] = time.perf_counter() - t0
    ck.stats.setdefault("qual_time", 0.0)
    ck.stats.setdefault("quant_time", 0.0)
    if res.init_value is None and res.sat is not None:
        res.init_value = not sym.manager.and_(res.sat, sym.init).is_false
    return res
