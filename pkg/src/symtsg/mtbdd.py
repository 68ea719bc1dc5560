"""Reduced ordered multi-terminal binary decision diagrams.

A :class:`Manager` owns a fixed variable order, a node store with a unique
table, and memo caches for every operator. Diagrams are handed out as
:class:`Mtbdd` (real-valued) or :class:`Bdd` (0/1-valued) handles; two handles
are equal exactly when they denote the same function.

Nodes are plain integers indexing parallel lists. A terminal node has level
``manager.nvars``, so terminals sort below every variable. Garbage collection
is mark-and-sweep, rooted at the nodes referenced by live handles.
"""

from __future__ import annotations

import math
import os
from collections.abc import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Bdd",
    "Manager",
    "Mtbdd",
    "MtbddError",
    "NodeLimitError",
]

INF = math.inf
REL_FLOOR = 1e-12


class MtbddError(Exception):
    """Misuse of the decision-diagram API."""


class NodeLimitError(MtbddError):
    """The node store exceeded its configured capacity."""


def _rel_diff(a: float, b: float) -> float:
    if a == b:
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return INF
    return abs(a - b) / max(abs(b), REL_FLOOR)


def _times(a: float, b: float) -> float:
    # 0 * inf is taken as 0 so absent transitions stay inert
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def _minus(a: float, b: float) -> float:
    r = a - b
    if r != r:
        raise MtbddError("inf - inf is undefined")
    return r


def _divide(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0:
            return 0.0
        return math.copysign(INF, a)
    return a / b


_BINOPS = {
    "+": lambda a, b: a + b,
    "-": _minus,
    "*": _times,
    "/": _divide,
    "min": min,
    "max": max,
    ">": lambda a, b: 1.0 if a > b else 0.0,
    ">=": lambda a, b: 1.0 if a >= b else 0.0,
    "<": lambda a, b: 1.0 if a < b else 0.0,
    "<=": lambda a, b: 1.0 if a <= b else 0.0,
    "==": lambda a, b: 1.0 if a == b else 0.0,
    "!=": lambda a, b: 1.0 if a != b else 0.0,
}
_COMMUTATIVE = frozenset({"+", "*", "min", "max", "==", "!=", "and", "or"})
_BOOLEAN_RESULT = frozenset({">", ">=", "<", "<=", "==", "!=", "and", "or"})
_ABSTRACT_OPS = frozenset({"+", "min", "max", "or"})


class Manager:
    """Variable order, node store and operator caches.

    ``variables`` is either a count or a sequence of variable names; the
    order is fixed for the manager's lifetime. Not thread-safe.
    """

    def __init__(
        self,
        variables: int | Sequence[str],
        *,
        max_nodes: int | None = None,
        gc_threshold: int = 200_000,
        cache_cap: int = 2_000_000,
    ):
        if isinstance(variables, int):
            names = [f"v{i}" for i in range(variables)]
        else:
            names = [str(v) for v in variables]
        if len(set(names)) != len(names):
            raise MtbddError("duplicate variable names")
        self.names: list[str] = names
        self.nvars = len(names)
        self._index = {n: i for i, n in enumerate(names)}
        if max_nodes is None:
            env = os.environ.get("SYMTSG_MAX_NODES")
            max_nodes = int(env) if env else None
        self.max_nodes = max_nodes
        self.gc_threshold = gc_threshold
        self.cache_cap = cache_cap

        self._lvl: list[int] = []
        self._hi: list[int] = []
        self._lo: list[int] = []
        self._val: list[float] = []
        self._unique: dict[tuple[int, int, int], int] = {}
        self._terminals: dict[float, int] = {}
        self._free: list[int] = []
        self._refs: dict[int, int] = {}
        self._caches: dict[object, dict] = {}
        self._boolean: dict[int, bool] = {}
        self.gc_runs = 0

        self.ZERO = self._terminal(0.0)
        self.ONE = self._terminal(1.0)

    # ------------------------------------------------------------------
    # node store
    def _alloc(self, lvl: int, hi: int, lo: int, val: float) -> int:
        if self._free:
            n = self._free.pop()
            self._lvl[n] = lvl
            self._hi[n] = hi
            self._lo[n] = lo
            self._val[n] = val
        else:
            n = len(self._lvl)
            self._lvl.append(lvl)
            self._hi.append(hi)
            self._lo.append(lo)
            self._val.append(val)
        return n

    def _terminal(self, value: float) -> int:
        value = float(value)
        if value != value:
            raise MtbddError("NaN terminal")
        if value == 0.0:
            value = 0.0  # folds -0.0
        n = self._terminals.get(value)
        if n is None:
            n = self._alloc(self.nvars, -1, -1, value)
            self._terminals[value] = n
        return n

    def _mk(self, lvl: int, hi: int, lo: int) -> int:
        if hi == lo:
            return hi
        key = (lvl, hi, lo)
        n = self._unique.get(key)
        if n is None:
            n = self._alloc(lvl, hi, lo, 0.0)
            self._unique[key] = n
        return n

    def __len__(self) -> int:
        return len(self._lvl) - len(self._free)

    def _cache(self, key) -> dict:
        c = self._caches.get(key)
        if c is None:
            c = self._caches[key] = {}
        elif len(c) > self.cache_cap:
            c.clear()
        return c

    def _wrap(self, node: int, boolean: bool = False) -> Mtbdd:
        h = Bdd(self, node) if boolean else Mtbdd(self, node)
        if len(self._lvl) - len(self._free) > self.gc_threshold:
            self.collect_garbage()
            live = len(self)
            if self.max_nodes is not None and live > self.max_nodes:
                raise NodeLimitError(f"{live} live nodes exceed capacity {self.max_nodes}")
            if live > self.gc_threshold // 2:
                self.gc_threshold *= 2
        return h

    def collect_garbage(self) -> int:
        """Sweep every node unreachable from a live handle; returns count freed."""
        lvl, hi, lo = self._lvl, self._hi, self._lo
        term = self.nvars
        marked = bytearray(len(lvl))
        stack = [n for n, c in self._refs.items() if c > 0]
        stack += [self.ZERO, self.ONE]
        while stack:
            n = stack.pop()
            if marked[n]:
                continue
            marked[n] = 1
            if lvl[n] != term:
                stack.append(hi[n])
                stack.append(lo[n])
        free = set(self._free)
        freed = 0
        for n in range(len(lvl)):
            if marked[n] or n in free:
                continue
            if lvl[n] == term:
                del self._terminals[self._val[n]]
            else:
                del self._unique[(lvl[n], hi[n], lo[n])]
            self._free.append(n)
            freed += 1
        self._caches.clear()
        self._boolean.clear()
        self.gc_runs += 1
        return freed

    # ------------------------------------------------------------------
    # variables and handles
    def level(self, v: int | str) -> int:
        if isinstance(v, str):
            try:
                return self._index[v]
            except KeyError:
                raise MtbddError(f"undeclared variable {v!r}") from None
        if not 0 <= v < self.nvars:
            raise MtbddError(f"undeclared variable index {v}")
        return v

    def levels(self, vs: Iterable[int | str]) -> list[int]:
        return [self.level(v) for v in vs]

    def rename_variable(self, v: int | str, name: str) -> None:
        i = self.level(v)
        if name in self._index and self._index[name] != i:
            raise MtbddError(f"variable name {name!r} already used")
        del self._index[self.names[i]]
        self.names[i] = name
        self._index[name] = i

    def _node(self, m: Mtbdd) -> int:
        if not isinstance(m, Mtbdd):
            raise TypeError(f"expected a diagram handle, got {type(m).__name__}")
        if m.manager is not self:
            raise MtbddError("diagram belongs to a different manager")
        return m.node

    def _is_bool_node(self, n: int) -> bool:
        cached = self._boolean.get(n)
        if cached is not None:
            return cached
        term = self.nvars
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        seen = set()
        stack = [n]
        ok = True
        while stack:
            k = stack.pop()
            if k in seen:
                continue
            seen.add(k)
            if lvl[k] == term:
                if val[k] != 0.0 and val[k] != 1.0:
                    ok = False
                    break
            else:
                stack.append(hi[k])
                stack.append(lo[k])
        self._boolean[n] = ok
        return ok

    def _bool_node(self, b: Mtbdd) -> int:
        n = self._node(b)
        if not isinstance(b, Bdd) and not self._is_bool_node(n):
            raise MtbddError("operand has non-Boolean terminals")
        return n

    def as_bdd(self, m: Mtbdd) -> Bdd:
        """View a 0/1-valued diagram as a :class:`Bdd`."""
        return self._wrap(self._bool_node(m), True)

    # ------------------------------------------------------------------
    # constructors
    def const(self, c: float) -> Mtbdd:
        n = self._terminal(c)
        return self._wrap(n, n == self.ZERO or n == self.ONE)

    const_ = const

    @property
    def true(self) -> Bdd:
        return Bdd(self, self.ONE)

    @property
    def false(self) -> Bdd:
        return Bdd(self, self.ZERO)

    def var(self, v: int | str) -> Bdd:
        i = self.level(v)
        return self._wrap(self._mk(i, self.ONE, self.ZERO), True)

    def cube(self, valuation: Mapping[int | str, bool], variables: Iterable[int | str] | None = None) -> Bdd:
        """BDD true exactly on ``valuation`` (over ``variables``)."""
        vals = {self.level(k): bool(v) for k, v in valuation.items()}
        if variables is not None:
            vs = set(self.levels(variables))
            if vs != set(vals):
                raise MtbddError("cube valuation must assign exactly the given variables")
        n = self.ONE
        for lvl in sorted(vals, reverse=True):
            n = self._mk(lvl, n, self.ZERO) if vals[lvl] else self._mk(lvl, self.ZERO, n)
        return self._wrap(n, True)

    def from_minterms(self, levels: Sequence[int], entries: Iterable[tuple[Sequence[int], float]]) -> Mtbdd:
        """Diagram over ``levels`` (strictly increasing) from (bits, value) rows.

        Rows not listed are 0; duplicate rows are summed.
        """
        levels = list(levels)
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise MtbddError("levels must be strictly increasing")
        table: dict[tuple, float] = {}
        for bits, v in entries:
            key = tuple(1 if b else 0 for b in bits)
            if len(key) != len(levels):
                raise MtbddError("row width does not match variable count")
            table[key] = table.get(key, 0.0) + v
        rows = sorted((k, v) for k, v in table.items() if v != 0.0)
        mk, term = self._mk, self._terminal
        depth_max = len(levels)

        def build(lo_i: int, hi_i: int, depth: int) -> int:
            if lo_i == hi_i:
                return self.ZERO
            if depth == depth_max:
                return term(rows[lo_i][1])
            split = lo_i
            while split < hi_i and rows[split][0][depth] == 0:
                split += 1
            return mk(levels[depth], build(split, hi_i, depth + 1), build(lo_i, split, depth + 1))

        return self._wrap(build(0, len(rows), 0))

    # ------------------------------------------------------------------
    # apply family
    def _apply_node(self, op: str, f: int, g: int) -> int:
        if op == "and":
            return self._and(f, g)
        if op == "or":
            return self._or(f, g)
        if op == "+":
            return self._plus(f, g)
        if op == "*":
            return self._mul(f, g)
        fn = _BINOPS[op]
        return self._generic(op, fn, f, g)

    def _generic(self, key, fn, f: int, g: int) -> int:
        cache = self._cache(key)
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        term = self.nvars
        mk, terminal = self._mk, self._terminal
        comm = key in _COMMUTATIVE

        def rec(f: int, g: int) -> int:
            lf = lvl[f]
            lg = lvl[g]
            if lf == term and lg == term:
                return terminal(fn(val[f], val[g]))
            if comm and f > g:
                f, g, lf, lg = g, f, lg, lf
            k = (f, g)
            r = cache.get(k)
            if r is not None:
                return r
            if lf == lg:
                r = mk(lf, rec(hi[f], hi[g]), rec(lo[f], lo[g]))
            elif lf < lg:
                r = mk(lf, rec(hi[f], g), rec(lo[f], g))
            else:
                r = mk(lg, rec(f, hi[g]), rec(f, lo[g]))
            cache[k] = r
            return r

        return rec(f, g)

    def _plus(self, f: int, g: int) -> int:
        return self._plus_fn()(f, g)

    def _plus_fn(self):
        """The recursive pointwise sum, bound to the current ``+`` cache."""
        cache = self._cache("+")
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        term = self.nvars
        mk, terminal, terms = self._mk, self._terminal, self._terminals
        zero = self.ZERO

        def rec(f: int, g: int) -> int:
            if f == zero:
                return g
            if g == zero:
                return f
            lf = lvl[f]
            lg = lvl[g]
            if lf == term and lg == term:
                r = val[f] + val[g]
                n = terms.get(r)
                if n is not None:
                    return n
                if r != r:
                    raise MtbddError("inf + -inf is undefined")
                return terminal(r)
            if f > g:
                f, g, lf, lg = g, f, lg, lf
            k = (f, g)
            r = cache.get(k)
            if r is not None:
                return r
            if lf == lg:
                r = mk(lf, rec(hi[f], hi[g]), rec(lo[f], lo[g]))
            elif lf < lg:
                r = mk(lf, rec(hi[f], g), rec(lo[f], g))
            else:
                r = mk(lg, rec(f, hi[g]), rec(f, lo[g]))
            cache[k] = r
            return r

        return rec

    def _mul(self, f: int, g: int) -> int:
        cache = self._cache("*")
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        term = self.nvars
        mk, terminal = self._mk, self._terminal
        zero, one = self.ZERO, self.ONE

        def rec(f: int, g: int) -> int:
            if f == zero or g == zero:
                return zero
            if f == one:
                return g
            if g == one:
                return f
            lf = lvl[f]
            lg = lvl[g]
            if lf == term and lg == term:
                return terminal(val[f] * val[g])
            if f > g:
                f, g, lf, lg = g, f, lg, lf
            k = (f, g)
            r = cache.get(k)
            if r is not None:
                return r
            if lf == lg:
                r = mk(lf, rec(hi[f], hi[g]), rec(lo[f], lo[g]))
            elif lf < lg:
                r = mk(lf, rec(hi[f], g), rec(lo[f], g))
            else:
                r = mk(lg, rec(f, hi[g]), rec(f, lo[g]))
            cache[k] = r
            return r

        return rec(f, g)

    def _and(self, f: int, g: int) -> int:
        cache = self._cache("and")
        lvl, hi, lo = self._lvl, self._hi, self._lo
        mk = self._mk
        zero, one = self.ZERO, self.ONE

        def rec(f: int, g: int) -> int:
            if f == zero or g == zero:
                return zero
            if f == one or f == g:
                return g
            if g == one:
                return f
            if f > g:
                f, g = g, f
            k = (f, g)
            r = cache.get(k)
            if r is not None:
                return r
            lf = lvl[f]
            lg = lvl[g]
            if lf == lg:
                r = mk(lf, rec(hi[f], hi[g]), rec(lo[f], lo[g]))
            elif lf < lg:
                r = mk(lf, rec(hi[f], g), rec(lo[f], g))
            else:
                r = mk(lg, rec(f, hi[g]), rec(f, lo[g]))
            cache[k] = r
            return r

        return rec(f, g)

    def _or(self, f: int, g: int) -> int:
        cache = self._cache("or")
        lvl, hi, lo = self._lvl, self._hi, self._lo
        mk = self._mk
        zero, one = self.ZERO, self.ONE

        def rec(f: int, g: int) -> int:
            if f == one or g == one:
                return one
            if f == zero or f == g:
                return g
            if g == zero:
                return f
            if f > g:
                f, g = g, f
            k = (f, g)
            r = cache.get(k)
            if r is not None:
                return r
            lf = lvl[f]
            lg = lvl[g]
            if lf == lg:
                r = mk(lf, rec(hi[f], hi[g]), rec(lo[f], lo[g]))
            elif lf < lg:
                r = mk(lf, rec(hi[f], g), rec(lo[f], g))
            else:
                r = mk(lg, rec(f, hi[g]), rec(f, lo[g]))
            cache[k] = r
            return r

        return rec(f, g)

    def _not(self, f: int) -> int:
        cache = self._cache("not")
        lvl, hi, lo = self._lvl, self._hi, self._lo
        mk = self._mk
        zero, one = self.ZERO, self.ONE

        def rec(f: int) -> int:
            if f == zero:
                return one
            if f == one:
                return zero
            r = cache.get(f)
            if r is None:
                r = mk(lvl[f], rec(hi[f]), rec(lo[f]))
                cache[f] = r
            return r

        return rec(f)

    def _approx_eq(self, f: int, g: int, eps: float) -> int:
        def close(a: float, b: float) -> float:
            return 1.0 if _rel_diff(a, b) < eps else 0.0

        return self._generic(("~=", eps), close, f, g)

    def _map(self, key, fn, f: int) -> int:
        """Apply a unary terminal function."""
        cache = self._cache(key)
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        term = self.nvars
        mk, terminal = self._mk, self._terminal

        def rec(f: int) -> int:
            if lvl[f] == term:
                return terminal(fn(val[f]))
            r = cache.get(f)
            if r is None:
                r = mk(lvl[f], rec(hi[f]), rec(lo[f]))
                cache[f] = r
            return r

        return rec(f)

    def _ite(self, b: int, f: int, g: int) -> int:
        cache = self._cache("ite")
        lvl, hi, lo = self._lvl, self._hi, self._lo
        mk = self._mk
        zero, one = self.ZERO, self.ONE

        def rec(b: int, f: int, g: int) -> int:
            if b == one or f == g:
                return f
            if b == zero:
                return g
            k = (b, f, g)
            r = cache.get(k)
            if r is not None:
                return r
            t = min(lvl[b], lvl[f], lvl[g])
            b1, b0 = (hi[b], lo[b]) if lvl[b] == t else (b, b)
            f1, f0 = (hi[f], lo[f]) if lvl[f] == t else (f, f)
            g1, g0 = (hi[g], lo[g]) if lvl[g] == t else (g, g)
            r = mk(t, rec(b1, f1, g1), rec(b0, f0, g0))
            cache[k] = r
            return r

        return rec(b, f, g)

    def apply(self, op: str, m1: Mtbdd, m2: Mtbdd, *, eps: float = 1e-6) -> Mtbdd:
        """Pointwise ``m1 op m2``.

        ``op`` is one of ``+ - * / min max > >= < <= == !=`` or ``~=``
        (approximate equality: relative difference below ``eps``).
        Comparisons return a :class:`Bdd`.
        """
        f, g = self._node(m1), self._node(m2)
        if op == "~=":
            return self._wrap(self._approx_eq(f, g, eps), True)
        if op in ("and", "or"):
            return self._wrap(self._apply_node(op, self._bool_node(m1), self._bool_node(m2)), True)
        if op not in _BINOPS:
            raise MtbddError(f"unknown operator {op!r}")
        return self._wrap(self._apply_node(op, f, g), op in _BOOLEAN_RESULT)

    def and_(self, b1: Mtbdd, b2: Mtbdd) -> Bdd:
        return self._wrap(self._and(self._bool_node(b1), self._bool_node(b2)), True)

    def or_(self, b1: Mtbdd, b2: Mtbdd) -> Bdd:
        return self._wrap(self._or(self._bool_node(b1), self._bool_node(b2)), True)

    def not_(self, b: Mtbdd) -> Bdd:
        return self._wrap(self._not(self._bool_node(b)), True)

    def disjoin(self, bs: Iterable[Mtbdd]) -> Bdd:
        n = self.ZERO
        for b in bs:
            n = self._or(n, self._bool_node(b))
        return self._wrap(n, True)

    def conjoin(self, bs: Iterable[Mtbdd]) -> Bdd:
        n = self.ONE
        for b in bs:
            n = self._and(n, self._bool_node(b))
        return self._wrap(n, True)

    def if_then_else(self, b: Mtbdd, m1: Mtbdd, m2: Mtbdd) -> Mtbdd:
        bn = self._bool_node(b)
        f, g = self._node(m1), self._node(m2)
        boolean = isinstance(m1, Bdd) and isinstance(m2, Bdd)
        return self._wrap(self._ite(bn, f, g), boolean)

    def apply_fn(self, fn, m1: Mtbdd, m2: Mtbdd, *, key=None) -> Mtbdd:
        """Pointwise ``fn(a, b)`` for an arbitrary terminal function.

        ``key`` names the function for caching; without it every call starts
        with a fresh cache.
        """
        cache_key = ("fn", key) if key is not None else ("fn", object())
        return self._wrap(self._generic(cache_key, _checked(fn), self._node(m1), self._node(m2)))

    def map_terminals(self, fn, m: Mtbdd, *, key=None) -> Mtbdd:
        """Apply ``fn`` to every terminal value; pass ``key`` to enable caching."""
        cache_key = ("map", key) if key is not None else ("map", object())
        return self._wrap(self._map(cache_key, _checked(fn), self._node(m)))

    def threshold(self, m: Mtbdd, op: str, bound: float) -> Bdd:
        """BDD of valuations where ``value op bound`` holds."""
        if op not in (">", ">=", "<", "<=", "==", "!="):
            raise MtbddError(f"unknown comparison {op!r}")
        return self.apply(op, m, self.const(bound))

    def nonzero(self, m: Mtbdd) -> Bdd:
        """BDD of the support of ``m`` (value != 0)."""
        return self._wrap(self._nonzero(self._node(m)), True)

    def _nonzero(self, f: int) -> int:
        zero, one = self.ZERO, self.ONE
        return self._map("nonzero", lambda a: 0.0 if a == 0.0 else 1.0, f) if f not in (zero, one) else f

    # ------------------------------------------------------------------
    # abstraction
    def _abstract(self, op: str, levels: Sequence[int], f: int) -> int:
        if not levels:
            return f
        nv = self.nvars
        is_abs = bytearray(nv + 1)
        for l in levels:
            is_abs[l] = 1
        # cnt[l] = number of abstracted variables at level >= l
        cnt = [0] * (nv + 1)
        for l in range(nv - 1, -1, -1):
            cnt[l] = cnt[l + 1] + is_abs[l]
        bottom = max(levels)
        key = ("abs", op, tuple(sorted(levels)))
        cache = self._cache(key)
        lvl, hi, lo = self._lvl, self._hi, self._lo
        mk = self._mk
        scaling = op == "+"
        if op == "+":
            combine = self._plus_fn()
        elif op == "max":
            combine = lambda a, b: self._generic("max", max, a, b)
        elif op == "min":
            combine = lambda a, b: self._generic("min", min, a, b)
        else:
            combine = self._or
        scale = self._scale

        def rec(f: int) -> int:
            t = lvl[f]
            if t > bottom:
                return f
            r = cache.get(f)
            if r is not None:
                return r
            h, l = hi[f], lo[f]
            rh, rl = rec(h), rec(l)
            if scaling:
                sh = cnt[t + 1] - cnt[lvl[h]]
                sl = cnt[t + 1] - cnt[lvl[l]]
                if sh:
                    rh = scale(rh, sh)
                if sl:
                    rl = scale(rl, sl)
            if is_abs[t]:
                r = combine(rh, rl)
            else:
                r = mk(t, rh, rl)
            cache[f] = r
            return r

        r = rec(f)
        if scaling:
            s = cnt[0] - cnt[lvl[f]]
            if s:
                r = scale(r, s)
        return r

    def _scale(self, f: int, k: int) -> int:
        return self._mul(f, self._terminal(float(2**k)))

    def abstract(self, op: str, variables: Iterable[int | str], m: Mtbdd) -> Mtbdd:
        """Combine ``m`` over all assignments to ``variables`` with ``op``.

        ``op`` is ``+``, ``min``, ``max`` or ``or`` (the latter on BDDs).
        """
        if op not in _ABSTRACT_OPS:
            raise MtbddError(f"abstraction needs a commutative-associative operator, got {op!r}")
        levels = sorted(set(self.levels(variables)))
        if op == "or":
            n = self._bool_node(m)
            return self._wrap(self._abstract(op, levels, n), True)
        n = self._node(m)
        return self._wrap(self._abstract(op, levels, n), op in ("min", "max") and isinstance(m, Bdd))

    abstract_ = abstract

    def exists(self, variables: Iterable[int | str], b: Mtbdd) -> Bdd:
        return self.abstract("or", variables, b)

    def forall(self, variables: Iterable[int | str], b: Mtbdd) -> Bdd:
        n = self._bool_node(b)
        levels = sorted(set(self.levels(variables)))
        return self._wrap(self._not(self._abstract("or", levels, self._not(n))), True)

    # ------------------------------------------------------------------
    # renaming and matrix-vector product
    def _rename(self, f: int, mapping: dict[int, int]) -> int:
        """Level-wise substitution; raises if the result would be unordered."""
        if not mapping:
            return f
        key = ("rename", tuple(sorted(mapping.items())))
        cache = self._cache(key)
        lvl, hi, lo = self._lvl, self._hi, self._lo
        term = self.nvars
        mk = self._mk

        def rec(f: int) -> int:
            t = lvl[f]
            if t == term:
                return f
            r = cache.get(f)
            if r is not None:
                return r
            nt = mapping.get(t, t)
            h = rec(hi[f])
            l = rec(lo[f])
            if lvl[h] <= nt or lvl[l] <= nt:
                raise _OrderViolation
            r = mk(nt, h, l)
            cache[f] = r
            return r

        return rec(f)

    def replace_vars(self, m: Mtbdd, from_vars: Sequence[int | str], to_vars: Sequence[int | str]) -> Mtbdd:
        """Rename ``from_vars[i]`` to ``to_vars[i]``.

        Order-preserving renamings are done level by level; others (such as
        moving action bits below state bits) are rebuilt by composition.
        """
        src = self.levels(from_vars)
        dst = self.levels(to_vars)
        if len(src) != len(dst):
            raise MtbddError("from/to variable lists differ in length")
        if len(set(src)) != len(src) or len(set(dst)) != len(dst):
            raise MtbddError("repeated variable in renaming")
        mapping = {s: d for s, d in zip(src, dst) if s != d}
        f = self._node(m)
        sup = self._support(f)
        if any(d in sup and d not in mapping for d in mapping.values()):
            raise MtbddError("target variables already occur in the diagram")
        boolean = isinstance(m, Bdd)
        mapping = {s: d for s, d in mapping.items() if s in sup}
        try:
            return self._wrap(self._rename(f, mapping), boolean)
        except _OrderViolation:
            pass
        # general path: simultaneous substitution by if-then-else composition
        cache: dict[int, int] = {}
        lvl, hi, lo = self._lvl, self._hi, self._lo
        term = self.nvars
        mk, ite = self._mk, self._ite

        def rec(n: int) -> int:
            t = lvl[n]
            if t == term:
                return n
            r = cache.get(n)
            if r is None:
                nt = mapping.get(t, t)
                r = ite(mk(nt, self.ONE, self.ZERO), rec(hi[n]), rec(lo[n]))
                cache[n] = r
            return r

        r = rec(f)
        return self._wrap(r, boolean)

    def mv_mult(
        self,
        m: Mtbdd,
        v: Mtbdd,
        col_vars: Sequence[int | str],
        row_vars: Sequence[int | str] | None = None,
    ) -> Mtbdd:
        """Matrix-vector product: sum over ``col_vars`` of ``m * v[row->col]``.

        ``row_vars[i]`` pairs with ``col_vars[i]``; when omitted each column
        variable pairs with the variable immediately above it in the order
        (the interleaved row/column convention).
        """
        cols = self.levels(col_vars)
        rows = [c - 1 for c in cols] if row_vars is None else self.levels(row_vars)
        if len(rows) != len(cols) or any(r < 0 for r in rows) or set(rows) & set(cols):
            raise MtbddError("row/column variable pairing mismatch")
        f, g = self._node(m), self._node(v)
        sup = self._support(g)
        if sup & set(cols):
            raise MtbddError("vector depends on a column variable")
        mapping = {r: c for r, c in zip(rows, cols) if r in sup}
        try:
            gc = self._rename(g, mapping)
        except _OrderViolation:
            raise MtbddError("row/column pairing cannot be realised in this variable order") from None
        return self._wrap(self._mult_sum(f, gc, sorted(cols)))

    def _mult_sum(self, f: int, g: int, levels: Sequence[int]) -> int:
        nv = self.nvars
        is_abs = bytearray(nv + 1)
        for l in levels:
            is_abs[l] = 1
        cnt = [0] * (nv + 1)
        for l in range(nv - 1, -1, -1):
            cnt[l] = cnt[l + 1] + is_abs[l]
        cache = self._cache(("mvsum", tuple(levels)))
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        term = nv
        mk, terminal, terms = self._mk, self._terminal, self._terminals
        plus, scale = self._plus_fn(), self._scale
        zero = self.ZERO

        def rec(f: int, g: int) -> int:
            if f == zero or g == zero:
                return zero
            lf = lvl[f]
            lg = lvl[g]
            if lf == term and lg == term:
                x = val[f] * val[g]
                n = terms.get(x)
                return n if n is not None else terminal(x)
            k = (f, g)
            r = cache.get(k)
            if r is not None:
                return r
            if lf == lg:
                t = lf
                f1, f0, g1, g0 = hi[f], lo[f], hi[g], lo[g]
            elif lf < lg:
                t = lf
                f1, f0, g1, g0 = hi[f], lo[f], g, g
            else:
                t = lg
                f1, f0, g1, g0 = f, f, hi[g], lo[g]
            rh = rec(f1, g1)
            rl = rec(f0, g0)
            c1 = cnt[t + 1]
            if c1:
                s = c1 - cnt[min(lvl[f1], lvl[g1])]
                if s:
                    rh = scale(rh, s)
                s = c1 - cnt[min(lvl[f0], lvl[g0])]
                if s:
                    rl = scale(rl, s)
            if is_abs[t]:
                r = plus(rh, rl)
            else:
                r = mk(t, rh, rl)
            cache[k] = r
            return r

        r = rec(f, g)
        s = cnt[0] - cnt[min(lvl[f], lvl[g])]
        if s:
            r = scale(r, s)
        return r

    # ------------------------------------------------------------------
    # inspection
    def _support(self, f: int) -> set[int]:
        lvl, hi, lo = self._lvl, self._hi, self._lo
        term = self.nvars
        out: set[int] = set()
        seen: set[int] = set()
        stack = [f]
        while stack:
            n = stack.pop()
            if n in seen or lvl[n] == term:
                continue
            seen.add(n)
            out.add(lvl[n])
            stack.append(hi[n])
            stack.append(lo[n])
        return out

    def support(self, m: Mtbdd) -> set[int]:
        """Levels of the variables ``m`` depends on."""
        return self._support(self._node(m))

    def evaluate(self, m: Mtbdd, valuation: Mapping[int | str, bool]) -> float:
        vals = {self.level(k): bool(v) for k, v in valuation.items()}
        n = self._node(m)
        lvl, hi, lo = self._lvl, self._hi, self._lo
        term = self.nvars
        while lvl[n] != term:
            t = lvl[n]
            if t not in vals:
                raise MtbddError(f"valuation does not assign variable {self.names[t]!r}")
            n = hi[n] if vals[t] else lo[n]
        return self._val[n]

    def node_count(self, m: Mtbdd | Iterable[Mtbdd]) -> int:
        """Distinct nodes (terminals included) reachable from the root(s)."""
        roots = [m] if isinstance(m, Mtbdd) else list(m)
        lvl, hi, lo = self._lvl, self._hi, self._lo
        term = self.nvars
        seen: set[int] = set()
        stack = [self._node(r) for r in roots]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            if lvl[n] != term:
                stack.append(hi[n])
                stack.append(lo[n])
        return len(seen)

    def enumerate_paths(self, m: Mtbdd) -> Iterator[tuple[dict[int, bool], float]]:
        """Yield (partial valuation, value) for each root-to-nonzero-terminal path."""
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        term = self.nvars
        zero = self.ZERO
        path: dict[int, bool] = {}

        def rec(n: int):
            if n == zero:
                return
            if lvl[n] == term:
                yield dict(path), val[n]
                return
            t = lvl[n]
            path[t] = False
            yield from rec(lo[n])
            path[t] = True
            yield from rec(hi[n])
            del path[t]

        yield from rec(self._node(m))

    def minterms(self, m: Mtbdd, variables: Sequence[int | str]) -> Iterator[tuple[tuple[int, ...], float]]:
        """Nonzero entries as full bit tuples over ``variables`` (don't-cares expanded)."""
        levels = self.levels(variables)
        pos = {l: i for i, l in enumerate(levels)}
        n = self._node(m)
        if not self._support(n) <= set(levels):
            raise MtbddError("diagram depends on variables outside the given list")
        for partial, value in self.enumerate_paths(m):
            free = [i for i, l in enumerate(levels) if l not in partial]
            base = [0] * len(levels)
            for l, b in partial.items():
                base[pos[l]] = 1 if b else 0
            for mask in range(1 << len(free)):
                bits = list(base)
                for j, i in enumerate(free):
                    bits[i] = (mask >> (len(free) - 1 - j)) & 1
                yield tuple(bits), value

    def terminal_values(self, m: Mtbdd) -> set[float]:
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        term = self.nvars
        out: set[float] = set()
        seen: set[int] = set()
        stack = [self._node(m)]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            if lvl[n] == term:
                out.add(val[n])
            else:
                stack.append(hi[n])
                stack.append(lo[n])
        return out

    def max_value(self, m: Mtbdd) -> float:
        return max(self.terminal_values(m))

    def min_value(self, m: Mtbdd) -> float:
        return min(self.terminal_values(m))

    def sup_norm(self, m1: Mtbdd, m2: Mtbdd, relative: bool = True) -> float:
        """Largest pointwise difference; relative to ``|m2|`` when ``relative``."""
        f, g = self._node(m1), self._node(m2)
        if f == g:
            return 0.0
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        term = self.nvars
        memo: dict[tuple[int, int], float] = {}

        def d(a: float, b: float) -> float:
            if a == b:
                return 0.0
            if math.isinf(a) or math.isinf(b):
                return INF
            if relative:
                return abs(a - b) / max(abs(b), REL_FLOOR)
            return abs(a - b)

        def rec(f: int, g: int) -> float:
            if f == g:
                return 0.0
            lf = lvl[f]
            lg = lvl[g]
            if lf == term and lg == term:
                return d(val[f], val[g])
            k = (f, g)
            r = memo.get(k)
            if r is not None:
                return r
            if lf == lg:
                r = max(rec(hi[f], hi[g]), rec(lo[f], lo[g]))
            elif lf < lg:
                r = max(rec(hi[f], g), rec(lo[f], g))
            else:
                r = max(rec(f, hi[g]), rec(f, lo[g]))
            memo[k] = r
            return r

        return rec(f, g)

    def sat_count(self, b: Mtbdd, variables: Sequence[int | str]) -> int:
        """Number of satisfying assignments over ``variables``."""
        levels = sorted(self.levels(variables))
        n = self._bool_node(b)
        if not self._support(n) <= set(levels):
            raise MtbddError("BDD depends on variables outside the given list")
        pos = {l: i for i, l in enumerate(levels)}
        k = len(levels)
        lvl, hi, lo = self._lvl, self._hi, self._lo
        term = self.nvars
        memo: dict[int, int] = {}

        def depth(n: int) -> int:
            return k if lvl[n] == term else pos[lvl[n]]

        def rec(n: int) -> int:
            if n == self.ZERO:
                return 0
            if n == self.ONE:
                return 1
            r = memo.get(n)
            if r is None:
                d = depth(n)
                h, l = hi[n], lo[n]
                r = (rec(h) << (depth(h) - d - 1)) + (rec(l) << (depth(l) - d - 1))
                memo[n] = r
            return r

        return rec(n) << depth(n)

    def pick_least(self, b: Mtbdd, variables: Sequence[int | str]) -> Bdd:
        """Keep, for every assignment of the other variables, only the
        lexicographically least satisfying assignment of ``variables``.

        ``variables`` must lie below every other variable ``b`` depends on.
        """
        levels = sorted(self.levels(variables))
        n = self._bool_node(b)
        others = self._support(n) - set(levels)
        if others and levels and max(others) > levels[0]:
            raise MtbddError("selection variables must be the lowest in the order")
        lvl, hi, lo = self._lvl, self._hi, self._lo
        mk = self._mk
        zero = self.ZERO
        first = levels[0] if levels else self.nvars
        memo: dict[int, int] = {}

        def choose(n: int, i: int) -> int:
            # n is a node at or below levels[i]
            if n == zero:
                return zero
            if i == len(levels):
                return n
            t = levels[i]
            if lvl[n] != t:
                return mk(t, zero, choose(n, i + 1))
            if lo[n] != zero:
                return mk(t, zero, choose(lo[n], i + 1))
            return mk(t, choose(hi[n], i + 1), zero)

        def rec(n: int) -> int:
            if lvl[n] >= first:
                return choose(n, 0)
            r = memo.get(n)
            if r is None:
                r = mk(lvl[n], rec(hi[n]), rec(lo[n]))
                memo[n] = r
            return r

        return self._wrap(rec(n), True)

    def to_dot(self, m: Mtbdd | Sequence[Mtbdd], names: Sequence[str] | None = None) -> str:
        """Graphviz source: solid then-edges, dashed else-edges, 0-terminal omitted."""
        roots = [m] if isinstance(m, Mtbdd) else list(m)
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        term = self.nvars
        zero = self.ZERO
        lines = ["digraph mtbdd {", "  ordering=out;"]
        seen: set[int] = set()
        stack = [self._node(r) for r in roots]
        for i, r in enumerate(roots):
            label = names[i] if names else f"f{i}"
            lines.append(f'  r{i} [shape=none, label="{label}"];')
            if self._node(r) != zero:
                lines.append(f"  r{i} -> n{self._node(r)};")
        while stack:
            n = stack.pop()
            if n in seen or n == zero:
                continue
            seen.add(n)
            if lvl[n] == term:
                lines.append(f'  n{n} [shape=box, label="{val[n]:g}"];')
                continue
            lines.append(f'  n{n} [shape=oval, label="{self.names[lvl[n]]}"];')
            if hi[n] != zero:
                lines.append(f"  n{n} -> n{hi[n]} [style=solid];")
            if lo[n] != zero:
                lines.append(f"  n{n} -> n{lo[n]} [style=dashed];")
            stack.append(hi[n])
            stack.append(lo[n])
        lines.append("}")
        return "\n".join(lines) + "\n"

    def check_structure(self) -> list[str]:
        """Validate ordering, reduction and uniqueness over the live store."""
        problems = []
        lvl, hi, lo, val = self._lvl, self._hi, self._lo, self._val
        term = self.nvars
        free = set(self._free)
        seen_vals: dict[float, int] = {}
        for n in range(len(lvl)):
            if n in free:
                continue
            if lvl[n] == term:
                v = val[n]
                if v in seen_vals:
                    problems.append(f"terminal {v} duplicated in nodes {seen_vals[v]} and {n}")
                seen_vals[v] = n
                if self._terminals.get(v) != n:
                    problems.append(f"terminal {n} missing from terminal table")
                continue
            h, l = hi[n], lo[n]
            if h == l:
                problems.append(f"node {n} is redundant")
            if h in free or l in free:
                problems.append(f"node {n} points at a freed node")
            elif lvl[h] <= lvl[n] or lvl[l] <= lvl[n]:
                problems.append(f"node {n} violates the variable order")
            if self._unique.get((lvl[n], h, l)) != n:
                problems.append(f"node {n} missing from unique table")
        if len(self._unique) + len(self._terminals) != len(self):
            problems.append("unique table size does not match live node count")
        return problems


class _OrderViolation(Exception):
    pass


def _checked(fn):
    def wrapped(*args):
        try:
            return float(fn(*args))
        except (ArithmeticError, ValueError, TypeError) as exc:
            raise MtbddError(f"terminal function failed on {args}: {exc}") from None

    return wrapped


class Mtbdd:
    """Handle to a real-valued decision diagram."""

    __slots__ = ("manager", "node")

    def __init__(self, manager: Manager, node: int):
        self.manager = manager
        self.node = node
        refs = manager._refs
        refs[node] = refs.get(node, 0) + 1

    def __del__(self):
        try:
            refs = self.manager._refs
            c = refs[self.node] - 1
            if c:
                refs[self.node] = c
            else:
                del refs[self.node]
        except (AttributeError, KeyError, TypeError):
            pass

    def __eq__(self, other):
        if not isinstance(other, Mtbdd):
            return NotImplemented
        return self.manager is other.manager and self.node == other.node

    def __hash__(self):
        return hash((id(self.manager), self.node))

    def __repr__(self):
        kind = type(self).__name__
        return f"<{kind} node={self.node} size={self.manager.node_count(self)}>"

    @property
    def is_terminal(self) -> bool:
        return self.manager._lvl[self.node] == self.manager.nvars

    @property
    def value(self) -> float:
        if not self.is_terminal:
            raise MtbddError("not a constant diagram")
        return self.manager._val[self.node]

    def __add__(self, other):
        return self.manager.apply("+", self, _lift(self.manager, other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.manager.apply("-", self, _lift(self.manager, other))

    def __rsub__(self, other):
        return self.manager.apply("-", _lift(self.manager, other), self)

    def __mul__(self, other):
        return self.manager.apply("*", self, _lift(self.manager, other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.manager.apply("/", self, _lift(self.manager, other))

    def __len__(self):
        return self.manager.node_count(self)


class Bdd(Mtbdd):
    """Handle to a diagram whose terminals are 0 and 1."""

    __slots__ = ()

    def __and__(self, other):
        return self.manager.and_(self, other)

    def __or__(self, other):
        return self.manager.or_(self, other)

    def __invert__(self):
        return self.manager.not_(self)

    def __sub__(self, other):
        if isinstance(other, Bdd):
            return self.manager.and_(self, self.manager.not_(other))
        return super().__sub__(other)

    @property
    def is_false(self) -> bool:
        return self.node == self.manager.ZERO

    @property
    def is_true(self) -> bool:
        return self.node == self.manager.ONE


def _lift(manager: Manager, x) -> Mtbdd:
    if isinstance(x, Mtbdd):
        return x
    return manager.const(x)
