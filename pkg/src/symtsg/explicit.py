"""Explicit-state reference engine and brute-force oracles.

``solve_explicit`` mirrors the symbolic checker on sparse matrices.
``brute_force_values`` and ``check_best_response`` enumerate memoryless
deterministic profiles and solve each induced Markov chain directly, so
they share no code with value iteration.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .checker import CheckError, ConvergenceError, SolverConfig
from .logic import (
    And,
    Atom,
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
from .model import Coalition, ExplicitTsg, ModelError

__all__ = [
    "BruteObjective",
    "ExplicitResult",
    "SparseGame",
    "brute_force_values",
    "check_best_response",
    "nash_explicit",
    "objective_of",
    "profile_values",
    "solve_explicit",
]

INF = math.inf
REL_FLOOR = 1e-12
BRUTE_CAP = 200_000


class SparseGame:
    """Choice-indexed sparse form of an ``ExplicitTsg``.

    Rows are the (state, action) choices sorted by state and then action
    index, so each state's rows form one contiguous block.
    """

    def __init__(self, game: ExplicitTsg):
        self.game = game
        self.n = game.num_states
        self.players = tuple(game.players)
        self.actions = tuple(game.actions)
        self.owner = np.array(game.owner, dtype=int)
        self.init = game.init
        keys = sorted(game.delta)
        self.row_state = np.array([s for s, _ in keys], dtype=int)
        self.row_action = np.array([a for _, a in keys], dtype=int)
        counts = np.bincount(self.row_state, minlength=self.n)
        if (counts == 0).any():
            raise ModelError("deadlock state in explicit game", [f"state {int(s)} has no choice" for s in np.flatnonzero(counts == 0)])
        self.starts = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(int)
        rows, cols, vals = [], [], []
        for r, k in enumerate(keys):
            for t, p in game.delta[k]:
                rows.append(r)
                cols.append(t)
                vals.append(p)
        self.P = sp.csr_matrix((vals, (rows, cols)), shape=(len(keys), self.n))
        self.P.sum_duplicates()
        self.Pb = (self.P > 0).astype(np.int32)
        self.labels = {name: game.label_vector(name) for name in game.labels}
        self.srew: dict[str, np.ndarray] = {}
        self.arew: dict[str, np.ndarray] = {}
        for name, r in game.rewards.items():
            self.srew[name] = r.state_vector(self.n)
            self.arew[name] = np.array([r.action_reward.get((int(s), int(a)), 0.0) for s, a in keys])
        for name, v in list(self.srew.items()) + list(self.arew.items()):
            if (v < 0).any() or not np.isfinite(v).all():
                raise ModelError(f"reward structure {name!r} must be finite and non-negative")

    @property
    def num_rows(self) -> int:
        return len(self.row_state)

    @cached_property
    def dense(self) -> np.ndarray:
        return self.P.toarray()

    def rows_of(self, s: int) -> range:
        end = self.starts[s + 1] if s + 1 < self.n else self.num_rows
        return range(self.starts[s], end)

    def label(self, name: str) -> np.ndarray:
        if name not in self.labels:
            if name == "init":
                v = np.zeros(self.n, dtype=bool)
                v[self.init] = True
                return v
            raise CheckError(f"unknown label {name!r}")
        return self.labels[name]

    def is_max(self, maxp: frozenset[int]) -> np.ndarray:
        return np.isin(self.owner, sorted(maxp))

    # -- graph primitives ---------------------------------------------
    def rows_into(self, X: np.ndarray) -> np.ndarray:
        """Rows with at least one successor in ``X``."""
        return (self.Pb @ X.astype(np.int32)) > 0

    def some(self, rowbool: np.ndarray) -> np.ndarray:
        return np.logical_or.reduceat(rowbool, self.starts)

    def every(self, rowbool: np.ndarray) -> np.ndarray:
        return np.logical_and.reduceat(rowbool, self.starts)

    def reduce(self, q: np.ndarray, is_max: np.ndarray) -> np.ndarray:
        hi = np.maximum.reduceat(q, self.starts)
        lo = np.minimum.reduceat(q, self.starts)
        return np.where(is_max, hi, lo)


@dataclass
class ExplicitResult:
    formula: object
    values: np.ndarray | None = None
    sat: np.ndarray | None = None
    strategy: dict[int, set[int]] | None = None
    opponent_strategy: dict[int, set[int]] | None = None
    coalition_values: tuple[np.ndarray, np.ndarray] | None = None
    profile: dict[int, int] | None = None
    init_value: object = None
    stats: dict = field(default_factory=dict)


# ----------------------------------------------------------------------
# qualitative precomputation


def prob0_explicit(g: SparseGame, is_max: np.ndarray, stay: np.ndarray, target: np.ndarray) -> np.ndarray:
    x = target.copy()
    while True:
        pre = g.rows_into(x)
        nx = x | (stay & np.where(is_max, g.some(pre), g.every(pre)))
        if (nx == x).all():
            return ~x
        x = nx


def prob1_explicit(g: SparseGame, is_max: np.ndarray, stay: np.ndarray, target: np.ndarray, *, escape: bool = False):
    """Almost-sure set and progress-witness rows for the maximisers.

    With ``escape``, also returns the minimisers' rows outside the set that
    keep the chance of missing the target positive (see the symbolic engine).
    """
    y = np.ones(g.n, dtype=bool)
    esc = np.zeros(g.num_rows, dtype=bool)
    while True:
        outside = g.rows_into(~y)
        inside = ~outside
        x = target.copy()
        witness = np.zeros(g.num_rows, dtype=bool)
        while True:
            good = inside & g.rows_into(x)
            nx = x | (stay & np.where(is_max, g.some(good), g.every(good)))
            new = nx & ~x
            if not new.any():
                break
            witness |= good & new[g.row_state] & is_max[g.row_state]
            x = nx
        if (x == y).all():
            return (y, witness, esc) if escape else (y, witness)
        if escape:
            dropped = y & ~x
            within = ~g.rows_into(~dropped)
            esc |= (dropped & ~is_max)[g.row_state] & (outside | within)
        y = x


# ----------------------------------------------------------------------
# value iteration


def _rel(a: np.ndarray, b: np.ndarray, relative: bool) -> float:
    same = a == b
    with np.errstate(invalid="ignore"):
        d = np.abs(a - b)
    if relative:
        d = d / np.maximum(np.abs(b), REL_FLOOR)
    d = np.where(same, 0.0, d)
    d = np.where(~same & (np.isinf(a) | np.isinf(b)), INF, d)
    return float(d.max()) if d.size else 0.0


def _close(a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    same = a == b
    with np.errstate(invalid="ignore"):
        ok = np.abs(a - b) <= tol * np.maximum(1.0, np.abs(b))
    return same | (ok & np.isfinite(a) & np.isfinite(b))


class _Solver:
    def __init__(self, g: SparseGame, is_max: np.ndarray, maybe: np.ndarray, srew=None, arew=None):
        self.g, self.is_max, self.maybe = g, is_max, maybe
        self.srew = srew
        self.arew = arew

    def rows(self, v: np.ndarray) -> np.ndarray:
        q = self.g.P @ v
        if self.arew is not None:
            q = q + self.arew
        return q

    def __call__(self, v: np.ndarray) -> np.ndarray:
        r = self.g.reduce(self.rows(v), self.is_max)
        if self.srew is not None:
            r = r + self.srew
        return np.where(self.maybe, r, 0.0)


def _iterate(solver: _Solver, fixed: np.ndarray, start: np.ndarray, cfg: SolverConfig, stats: dict, kind: str) -> np.ndarray:
    v = start
    t0 = time.perf_counter()
    monotone = True
    trace = []
    for it in range(1, cfg.max_iters + 1):
        new = np.where(solver.maybe, solver(v), fixed)
        if monotone and (new < v).any():
            monotone = False
        d = _rel(new, v, cfg.relative)
        trace.append(d)
        v = new
        if d < cfg.epsilon:
            _record(stats, kind, it, d, monotone, True, time.perf_counter() - t0)
            return v
    _record(stats, kind, cfg.max_iters, trace[-1], monotone, False, time.perf_counter() - t0)
    raise ConvergenceError(cfg.max_iters, trace[-1], trace[-20:])


def _record(stats, kind, iterations, sup_norm, monotone, converged, seconds):
    stats.setdefault("runs", []).append(
        {"kind": kind, "iterations": iterations, "sup_norm": sup_norm, "monotone": monotone, "converged": converged}
    )
    stats["iterations"] = stats.get("iterations", 0) + iterations
    stats["quant_time"] = stats.get("quant_time", 0.0) + seconds


def _steps(solver: _Solver, fixed, start, k, stats, kind):
    t0 = time.perf_counter()
    v = start
    monotone = True
    for _ in range(k):
        new = np.where(solver.maybe, solver(v), fixed)
        monotone = monotone and not (new < v).any()
        v = new
    _record(stats, kind, k, 0.0, monotone, True, time.perf_counter() - t0)
    return v


def _rows_to_map(g: SparseGame, rows: np.ndarray) -> dict[int, set[int]]:
    out: dict[int, set[int]] = {}
    for r in np.flatnonzero(rows):
        out.setdefault(int(g.row_state[r]), set()).add(int(g.row_action[r]))
    return out


def _progress(g: SparseGame, is_max: np.ndarray, base: np.ndarray, opt_rows: np.ndarray, region: np.ndarray) -> np.ndarray:
    x = base.copy()
    todo = region.copy()
    kept = np.zeros(g.num_rows, dtype=bool)
    rmax = is_max[g.row_state]
    while True:
        pre = g.rows_into(x)
        step = opt_rows & pre & todo[g.row_state] & rmax
        new = (g.some(step) & is_max) | (g.some(pre) & ~is_max & todo)
        new &= todo
        if not new.any():
            break
        kept |= step
        x |= new
        todo &= ~new
    return kept | (opt_rows & todo[g.row_state] & rmax)


def reach_explicit(g: SparseGame, maxp: frozenset[int], target: np.ndarray, stay: np.ndarray, cfg: SolverConfig, stats: dict | None = None):
    """Values of ``stay U target`` with ``maxp`` maximising, plus max/min optimal rows."""
    stats = {} if stats is None else stats
    is_max = g.is_max(maxp)
    t0 = time.perf_counter()
    s0 = prob0_explicit(g, is_max, stay, target)
    s1, witness = prob1_explicit(g, is_max, stay, target)
    maybe = ~(s0 | s1)
    stats["qual_time"] = stats.get("qual_time", 0.0) + time.perf_counter() - t0
    stats["prob0"], stats["prob1"], stats["maybe"] = int(s0.sum()), int(s1.sum()), int(maybe.sum())
    one = s1.astype(float)
    solver = _Solver(g, is_max, maybe)
    if maybe.any():
        v = _iterate(solver, one, one, cfg, stats, "reach")
    else:
        v = one
        _record(stats, "reach", 0, 0.0, True, True, 0.0)
    q = solver.rows(v)
    tol = cfg.strategy_tol
    rmaybe = maybe[g.row_state]
    rmax = is_max[g.row_state]
    opt = _close(q, v[g.row_state], tol) & rmaybe
    max_rows = _progress(g, is_max, s1, opt & rmax, maybe) | (witness & ~target[g.row_state])
    stay0 = ~g.rows_into(~s0) & s0[g.row_state] & ~rmax
    min_rows = (opt & ~rmax) | stay0
    return v, max_rows, min_rows, s0, s1


def reward_explicit(g: SparseGame, maxp: frozenset[int], name: str, rho, cfg: SolverConfig, stats: dict | None = None):
    stats = {} if stats is None else stats
    if name not in g.srew:
        raise CheckError(f"unknown reward structure {name!r}")
    srew, arew = g.srew[name], g.arew[name]
    is_max = g.is_max(maxp)
    everywhere = np.ones(g.n, dtype=bool)
    zero = np.zeros(g.n)
    if isinstance(rho, Instant):
        return _steps(_Solver(g, is_max, everywhere), zero, srew.copy(), rho.k, stats, "instant"), None, None
    if isinstance(rho, Cumulative):
        return _steps(_Solver(g, is_max, everywhere, srew, arew), zero, zero, rho.k, stats, "cumulative"), None, None
    target = rho
    t0 = time.perf_counter()
    fin, _, escape = prob1_explicit(g, ~is_max, everywhere, target, escape=True)
    inf = ~fin
    maybe = fin & ~target
    stats["qual_time"] = stats.get("qual_time", 0.0) + time.perf_counter() - t0
    stats["infinite"], stats["maybe"] = int(inf.sum()), int(maybe.sum())
    fixed = np.where(inf, INF, 0.0)
    solver = _Solver(g, is_max, maybe, srew, arew)
    if maybe.any():
        v = _iterate(solver, fixed, fixed, cfg, stats, "reward")
    else:
        v = fixed
        _record(stats, "reward", 0, 0.0, True, True, 0.0)
    q = solver.rows(v)
    base = np.where(maybe, v - np.where(maybe, srew, 0.0), 0.0)
    rmaybe = maybe[g.row_state]
    opt = _close(q, base[g.row_state], cfg.strategy_tol) & rmaybe
    rmax = is_max[g.row_state]
    # where the value is infinite, the maximisers keep the target at bay
    return v, (opt & rmax) | escape, opt & ~rmax


# ----------------------------------------------------------------------
# formula dispatch


class _Explicit:
    def __init__(self, g: SparseGame, cfg: SolverConfig):
        self.g, self.cfg = g, cfg
        self.stats: dict = {}

    def coalition(self, names) -> frozenset[int]:
        try:
            return Coalition.of(self.g.players, names).members
        except ModelError as exc:
            raise CheckError(str(exc)) from None

    def sat(self, f) -> np.ndarray:
        g = self.g
        if isinstance(f, TrueF):
            return np.ones(g.n, dtype=bool)
        if isinstance(f, FalseF):
            return np.zeros(g.n, dtype=bool)
        if isinstance(f, Atom):
            return g.label(f.name).copy()
        if isinstance(f, Not):
            return ~self.sat(f.arg)
        if isinstance(f, And):
            return self.sat(f.left) & self.sat(f.right)
        if isinstance(f, Or):
            return self.sat(f.left) | self.sat(f.right)
        if isinstance(f, (ZeroSumP, ZeroSumR, Nash)):
            if f.bound is None:
                raise CheckError("numeric queries cannot be used as state formulas")
            return self.evaluate(f).sat
        raise CheckError(f"unsupported formula {f!r}")

    def evaluate(self, f) -> ExplicitResult:
        if isinstance(f, ZeroSumP):
            return self.zero_sum_p(f)
        if isinstance(f, ZeroSumR):
            return self.zero_sum_r(f)
        if isinstance(f, Nash):
            return self.nash(f)
        s = self.sat(f)
        return ExplicitResult(f, sat=s, init_value=bool(s[self.g.init]))

    def direction(self, f) -> tuple[frozenset[int], bool]:
        c = self.coalition(f.coalition)
        if f.opt is not None:
            return c, f.opt == "max"
        return c, f.bound.op in (">", ">=")

    def finish(self, f, values, c_max, max_rows, min_rows, tvalues=None) -> ExplicitResult:
        g = self.g
        res = ExplicitResult(f, values=values, stats=self.stats)
        if max_rows is not None:
            own, opp = (max_rows, min_rows) if c_max else (min_rows, max_rows)
            res.strategy = _rows_to_map(g, own)
            res.opponent_strategy = _rows_to_map(g, opp)
            self.stats["strategy_size"] = sum(len(a) for a in res.strategy.values())
        if f.bound is not None:
            t = values if tvalues is None else tvalues
            res.sat = _compare(t, f.bound.op, f.bound.value)
            res.init_value = bool(res.sat[g.init])
        else:
            res.init_value = float(values[g.init])
        return res

    def zero_sum_p(self, f: ZeroSumP) -> ExplicitResult:
        g = self.g
        c, c_max = self.direction(f)
        maxp = c if c_max else frozenset(range(len(g.players))) - c
        is_max = g.is_max(maxp)
        path = f.path
        max_rows = min_rows = None
        if isinstance(path, Next):
            ind = self.sat(path.arg).astype(float)
            v = _Solver(g, is_max, np.ones(g.n, dtype=bool))(ind)
        elif path.k is not None:
            goal = self.sat(path.right)
            maybe = self.sat(path.left) & ~goal
            v = _steps(_Solver(g, is_max, maybe), goal.astype(float), goal.astype(float), path.k, self.stats, "bounded")
        else:
            phi1, phi2 = self.sat(path.left), self.sat(path.right)
            qual = self.qualitative(f, is_max, phi1, phi2)
            if qual is not None:
                return qual
            v, max_rows, min_rows, _, _ = reach_explicit(g, maxp, phi2, phi1, self.cfg, self.stats)
        if isinstance(path, Until) and path.negated:
            return self.finish(f, 1.0 - v, c_max, max_rows, min_rows, tvalues=v)
        return self.finish(f, v, c_max, max_rows, min_rows)

    def qualitative(self, f: ZeroSumP, is_max, phi1, phi2) -> ExplicitResult | None:
        b = f.bound
        if b is None or f.path.negated:
            return None
        g = self.g
        if (b.op, b.value) in ((">", 0.0), ("<=", 0.0)):
            s0 = prob0_explicit(g, is_max, phi1, phi2)
            sat = ~s0 if b.op == ">" else s0
        elif (b.op, b.value) in ((">=", 1.0), ("<", 1.0)):
            s1, _ = prob1_explicit(g, is_max, phi1, phi2)
            sat = s1 if b.op == ">=" else ~s1
        else:
            return None
        self.stats["qualitative"] = True
        return ExplicitResult(f, sat=sat, init_value=bool(sat[g.init]), stats=self.stats)

    def zero_sum_r(self, f: ZeroSumR) -> ExplicitResult:
        g = self.g
        c, c_max = self.direction(f)
        maxp = c if c_max else frozenset(range(len(g.players))) - c
        rho = f.formula
        if isinstance(rho, ReachReward):
            rho = self.sat(rho.target)
        v, max_rows, min_rows = reward_explicit(g, maxp, f.reward, rho, self.cfg, self.stats)
        return self.finish(f, v, c_max, max_rows, min_rows)

    def nash(self, f: Nash) -> ExplicitResult:
        g = self.g
        c1, c2 = self.coalition(f.coalitions[0]), self.coalition(f.coalitions[1])
        (v1, v2), profile = nash_explicit(g, c1, c2, f.objectives, f.opt, self.cfg, sat=self.sat, stats=self.stats)
        total = v1 + v2
        res = ExplicitResult(f, values=total, coalition_values=(v1, v2), profile=profile, stats=self.stats)
        res.strategy = {s: {a} for s, a in profile.items()}
        if f.bound is not None:
            res.sat = _compare(total, f.bound.op, f.bound.value)
            res.init_value = bool(res.sat[g.init])
        else:
            res.init_value = float(total[g.init])
        return res


def _compare(v: np.ndarray, op: str, bound: float) -> np.ndarray:
    return {"<": v < bound, "<=": v <= bound, ">=": v >= bound, ">": v > bound}[op]


def solve_explicit(g: SparseGame | ExplicitTsg, f, cfg: SolverConfig | None = None) -> ExplicitResult:
    """Explicit-engine counterpart of ``checker.check``."""
    if isinstance(g, ExplicitTsg):
        g = SparseGame(g)
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    ex = _Explicit(g, cfg)
    res = ex.evaluate(f)
    res.stats = ex.stats
    ex.stats["total_time"] = time.perf_counter() - t0
    ex.stats.setdefault("qual_time", 0.0)
    ex.stats.setdefault("quant_time", 0.0)
    return res


# ----------------------------------------------------------------------
# Nash equilibria


def _nash_obj(g: SparseGame, obj: Objective, sat) -> dict:
    f = obj.formula
    if obj.kind == "P":
        if not isinstance(f, Until) or f.k is not None or f.negated:
            raise CheckError("Nash objectives support unbounded reachability/until probabilities only")
        target = sat(f.right)
        stay = sat(f.left)
        return {"kind": "P", "target": target, "pin": target | ~(stay | target), "pinval": target.astype(float), "srew": None, "arew": None}
    if not isinstance(f, ReachReward):
        raise CheckError("Nash reward objectives support reachability rewards (F) only")
    target = sat(f.target)
    nobody = np.zeros(g.n, dtype=bool)
    sure, _ = prob1_explicit(g, nobody, np.ones(g.n, dtype=bool), target)
    if not sure.all():
        raise CheckError("Nash reward objectives need the target reached almost surely under every profile")
    if obj.reward not in g.srew:
        raise CheckError(f"unknown reward structure {obj.reward!r}")
    return {"kind": "R", "target": target, "pin": target, "pinval": np.zeros(g.n), "srew": g.srew[obj.reward], "arew": g.arew[obj.reward]}


def nash_explicit(g: SparseGame, c1, c2, objectives, opt="max", cfg: SolverConfig | None = None, *, sat=None, stats=None):
    """Backward-induction equilibrium; returns ((values_1, values_2), profile state -> action)."""
    cfg = cfg or SolverConfig()
    stats = {} if stats is None else stats
    c1, c2 = frozenset(c1), frozenset(c2)
    n = len(g.players)
    if c1 & c2 or c1 | c2 != frozenset(range(n)) or not c1 or not c2:
        raise CheckError("Nash coalitions must partition the players")
    if sat is None:
        sat = _Explicit(g, cfg).sat
    objs = [_nash_obj(g, o, sat) for o in objectives]
    sign = 1.0 if opt == "max" else -1.0
    own1 = np.isin(g.owner, sorted(c1))[g.row_state]
    tol = cfg.strategy_tol

    def backups(vs):
        out = []
        for o, v in zip(objs, vs):
            q = g.P @ v
            if o["arew"] is not None:
                q = q + o["arew"] + o["srew"][g.row_state]
            q = np.where(o["pin"][g.row_state], o["pinval"][g.row_state], q)
            out.append(sign * q)
        return out

    def select(bs, prev=None):
        own = np.where(own1, bs[0], bs[1])
        best = np.maximum.reduceat(own, g.starts)[g.row_state]
        ok = _close(own, best, tol)
        total = np.where(ok, bs[0] + bs[1], -INF)
        best_total = np.maximum.reduceat(total, g.starts)[g.row_state]
        good = ok & _close(total, best_total, tol)
        # first good row per state: rows are sorted by action index
        idx = np.flatnonzero(good)
        first = {}
        for r in idx:
            first.setdefault(int(g.row_state[r]), int(r))
        out = np.array([first[s] for s in range(g.n)])
        if prev is not None:
            # keep a still-optimal previous choice so near-ties cannot oscillate
            out = np.where(good[prev], prev, out)
        return out

    start = [sign * np.where(o["pin"], o["pinval"], 0.0) for o in objs]
    vs = start
    it = 0
    chosen = None
    t0 = time.perf_counter()
    while True:
        it += 1
        if it > cfg.max_iters:
            raise ConvergenceError(cfg.max_iters, d, [])
        bs = backups(vs)
        chosen = select(bs, chosen)
        new = [b[chosen] for b in bs]
        d = max(_rel(a, b, cfg.relative) for a, b in zip(new, vs))
        vs = new
        if d < cfg.epsilon:
            break
    # freeze the profile, evaluate it precisely and repair local deviations;
    # only states whose owner gains switch, so indifferent owners stay put
    stats["equilibrium_checked"] = False
    for _ in range(50):
        vs = _chain_iterate(chosen, backups, start, cfg)
        bs = backups(vs)
        own = np.where(own1, bs[0], bs[1])
        best = np.maximum.reduceat(own, g.starts)
        gain = ~_close(own[chosen], best, tol)
        if not gain.any():
            stats["equilibrium_checked"] = True
            break
        chosen = np.where(gain, select(bs), chosen)
    else:
        vs = _chain_iterate(chosen, backups, start, cfg)
    _record(stats, "nash", it, d, False, True, time.perf_counter() - t0)
    profile = {s: int(g.row_action[chosen[s]]) for s in range(g.n)}
    return (sign * vs[0], sign * vs[1]), profile


def _chain_iterate(chosen, backups, start, cfg):
    eps = min(cfg.epsilon, 1e-10)
    vs = start
    for _ in range(cfg.max_iters):
        new = [b[chosen] for b in backups(vs)]
        d = max(_rel(a, b, cfg.relative) for a, b in zip(new, vs))
        vs = new
        if d < eps:
            return vs
    raise ConvergenceError(cfg.max_iters, d, [])


# ----------------------------------------------------------------------
# brute-force oracles


@dataclass(frozen=True)
class BruteObjective:
    """Objective for the oracles.

    ``kind`` is one of ``reach`` (``stay U target``), ``bounded`` (``k``
    steps), ``next``, ``reward`` (until ``target``), ``cumulative`` or
    ``instant`` (``k`` steps).
    """

    kind: str
    target: np.ndarray | None = None
    stay: np.ndarray | None = None
    k: int = 0
    srew: np.ndarray | None = None
    arew: np.ndarray | None = None


def _batched_reach(P: np.ndarray, target: np.ndarray, stay: np.ndarray) -> np.ndarray:
    """Exact reachability probabilities for a batch of chains ``P[b, s, t]``."""
    B, n, _ = P.shape
    adj = P > 0
    can = np.broadcast_to(target, (B, n)).copy()
    for _ in range(n):
        nxt = can | (stay & np.einsum("bst,bt->bs", adj, can))
        if (nxt == can).all():
            break
        can = nxt
    solve = can & ~target
    A = np.where(solve[:, :, None] & solve[:, None, :], -P, 0.0)
    A[:, np.arange(n), np.arange(n)] += 1.0
    rhs = np.where(solve, (P * target[None, None, :]).sum(axis=2), 0.0)
    x = np.linalg.solve(A, rhs[..., None])[..., 0]
    return np.where(target[None, :], 1.0, x)


def _batched_reward(P: np.ndarray, rew: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Expected reward until ``target`` per chain; infinite unless the target is reached almost surely."""
    B, n, _ = P.shape
    adj = P > 0
    ok = np.broadcast_to(target, (B, n)).copy()
    for _ in range(n):
        nxt = ok | np.einsum("bst,bt->bs", adj, ok)
        if (nxt == ok).all():
            break
        ok = nxt
    bad = ~ok
    for _ in range(n):
        nxt = bad | (~target[None, :] & np.einsum("bst,bt->bs", adj, bad))
        if (nxt == bad).all():
            break
        bad = nxt
    solve = ~bad & ~target[None, :]
    A = np.where(solve[:, :, None] & solve[:, None, :], -P, 0.0)
    A[:, np.arange(n), np.arange(n)] += 1.0
    rhs = np.where(solve, rew, 0.0)
    x = np.linalg.solve(A, rhs[..., None])[..., 0]
    return np.where(bad, INF, np.where(target[None, :], 0.0, x))


def _profiles(g: SparseGame, states: list[int]) -> list[tuple[int, ...]]:
    return list(itertools.product(*[list(g.rows_of(s)) for s in states]))


def _chain_batch(g: SparseGame, joint_rows: np.ndarray) -> np.ndarray:
    """``joint_rows[b, s]`` is the row chosen at state ``s`` in profile ``b``."""
    return g.dense[joint_rows]


def _chain_values(g: SparseGame, joint_rows: np.ndarray, obj: BruteObjective) -> np.ndarray:
    P = _chain_batch(g, joint_rows)
    if obj.kind == "reach":
        return _batched_reach(P, obj.target, obj.stay)
    if obj.kind == "reward":
        rew = obj.srew[None, :] + obj.arew[joint_rows]
        return _batched_reward(P, rew, obj.target)
    raise CheckError(f"objective kind {obj.kind!r} has no chain solution")


def brute_force_values(g: SparseGame | ExplicitTsg, obj: BruteObjective, maxp) -> np.ndarray:
    """Optimal values by exhaustive profile enumeration (max over ``maxp``'s profiles of the min over the rest).

    Bounded objectives depend on the step count, so they are solved by
    expectiminimax over the finite game tree instead.
    """
    if isinstance(g, ExplicitTsg):
        g = SparseGame(g)
    maxp = frozenset(maxp)
    if obj.kind in ("bounded", "next", "cumulative", "instant"):
        return _expectiminimax(g, obj, maxp)
    mstates = [s for s in range(g.n) if g.owner[s] in maxp]
    ostates = [s for s in range(g.n) if g.owner[s] not in maxp]
    sig, tau = _profiles(g, mstates), _profiles(g, ostates)
    if len(sig) * len(tau) > BRUTE_CAP:
        raise CheckError(f"{len(sig) * len(tau)} profiles exceed the brute-force cap")
    joint = np.zeros((len(sig), len(tau), g.n), dtype=int)
    if mstates:
        joint[:, :, mstates] = np.array(sig)[:, None, :]
    if ostates:
        joint[:, :, ostates] = np.array(tau)[None, :, :]
    vals = _chain_values(g, joint.reshape(-1, g.n), obj).reshape(len(sig), len(tau), g.n)
    return vals.min(axis=1).max(axis=0)


def _expectiminimax(g: SparseGame, obj: BruteObjective, maxp: frozenset[int]) -> np.ndarray:
    succ = [[(int(t), float(p)) for t, p in zip(g.P.indices[g.P.indptr[r]:g.P.indptr[r + 1]], g.P.data[g.P.indptr[r]:g.P.indptr[r + 1]])] for r in range(g.num_rows)]
    memo: dict[tuple[int, int], float] = {}

    def value(s: int, k: int) -> float:
        key = (s, k)
        if key in memo:
            return memo[key]
        if obj.kind == "next":
            outs = [sum(p * obj.target[t] for t, p in succ[r]) for r in g.rows_of(s)]
        elif obj.kind == "bounded":
            if obj.target[s]:
                memo[key] = 1.0
                return 1.0
            if k == 0 or not obj.stay[s]:
                memo[key] = 0.0
                return 0.0
            outs = [sum(p * value(t, k - 1) for t, p in succ[r]) for r in g.rows_of(s)]
        elif obj.kind == "instant":
            if k == 0:
                memo[key] = float(obj.srew[s])
                return memo[key]
            outs = [sum(p * value(t, k - 1) for t, p in succ[r]) for r in g.rows_of(s)]
        else:  # cumulative
            if k == 0:
                memo[key] = 0.0
                return 0.0
            outs = [obj.srew[s] + obj.arew[r] + sum(p * value(t, k - 1) for t, p in succ[r]) for r in g.rows_of(s)]
        r = max(outs) if g.owner[s] in maxp else min(outs)
        memo[key] = r
        return r

    return np.array([value(s, obj.k) for s in range(g.n)])


def objective_of(g: SparseGame, f) -> tuple[BruteObjective, frozenset[int], bool]:
    """Translate a zero-sum formula into (objective, maximising players, complement flag).

    With the complement flag set, the formula's value is one minus the
    objective's value (G formulas).
    """
    ex = _Explicit(g, SolverConfig())
    c, c_max = ex.direction(f)
    maxp = c if c_max else frozenset(range(len(g.players))) - c
    if isinstance(f, ZeroSumP):
        p = f.path
        if isinstance(p, Next):
            return BruteObjective("next", target=ex.sat(p.arg)), maxp, False
        target, stay = ex.sat(p.right), ex.sat(p.left)
        if p.k is not None:
            return BruteObjective("bounded", target=target, stay=stay, k=p.k), maxp, p.negated
        return BruteObjective("reach", target=target, stay=stay), maxp, p.negated
    if isinstance(f, ZeroSumR):
        if f.reward not in g.srew:
            raise CheckError(f"unknown reward structure {f.reward!r}")
        srew, arew = g.srew[f.reward], g.arew[f.reward]
        rho = f.formula
        if isinstance(rho, Instant):
            return BruteObjective("instant", k=rho.k, srew=srew, arew=arew), maxp, False
        if isinstance(rho, Cumulative):
            return BruteObjective("cumulative", k=rho.k, srew=srew, arew=arew), maxp, False
        return BruteObjective("reward", target=ex.sat(rho.target), srew=srew, arew=arew), maxp, False
    raise CheckError("brute force handles zero-sum formulas only")


def profile_values(g: SparseGame, profile: dict[int, int], obj: BruteObjective) -> np.ndarray:
    """Values of one memoryless deterministic profile (state -> action index)."""
    rows = np.array([[_row_of(g, s, profile[s]) for s in range(g.n)]])
    return _chain_values(g, rows, obj)[0]


def _row_of(g: SparseGame, s: int, a: int) -> int:
    for r in g.rows_of(s):
        if g.row_action[r] == a:
            return r
    raise CheckError(f"action {g.actions[a]!r} is not enabled in state {s}")


def check_best_response(g: SparseGame | ExplicitTsg, profile: dict[int, int], coalitions, objectives: list[BruteObjective], opt: str = "max") -> list[float]:
    """Largest gain any coalition obtains by a memoryless deterministic deviation, at any state.

    ``opt="min"`` means each coalition minimises its own objective.
    """
    if isinstance(g, ExplicitTsg):
        g = SparseGame(g)
    base_rows = np.array([_row_of(g, s, profile[s]) for s in range(g.n)])
    gains = []
    for c, obj in zip(coalitions, objectives):
        c = frozenset(c)
        mine = [s for s in range(g.n) if g.owner[s] in c]
        devs = _profiles(g, mine)
        if len(devs) > BRUTE_CAP:
            raise CheckError(f"{len(devs)} deviations exceed the brute-force cap")
        joint = np.tile(base_rows, (len(devs), 1))
        if mine:
            joint[:, mine] = np.array(devs)
        vals = _chain_values(g, joint, obj)
        base = _chain_values(g, base_rows[None, :], obj)[0]
        with np.errstate(invalid="ignore"):
            diff = vals - base[None, :] if opt == "max" else base[None, :] - vals
        diff = np.where(np.isnan(diff), 0.0, diff)
        gains.append(float(diff.max()))
    return gains
