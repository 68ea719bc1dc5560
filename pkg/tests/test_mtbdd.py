import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symtsg.mtbdd import Bdd, Manager, MtbddError, NodeLimitError

NV = 4


def dense(mgr, m, nv=None):
    nv = mgr.nvars if nv is None else nv
    out = np.empty(1 << nv)
    for i, bits in enumerate(itertools.product((0, 1), repeat=nv)):
        out[i] = mgr.evaluate(m, dict(enumerate(bits)))
    return out


def from_dense(mgr, arr):
    rows = [(bits, v) for bits, v in zip(itertools.product((0, 1), repeat=mgr.nvars), arr)]
    return mgr.from_minterms(range(mgr.nvars), rows)


values = st.sampled_from([0.0, 0.0, 0.5, 1.0, 2.0, 0.1, 3.0])
tables = st.lists(values, min_size=1 << NV, max_size=1 << NV)
bool_tables = st.lists(st.sampled_from([0.0, 1.0]), min_size=1 << NV, max_size=1 << NV)


class TestCanonicity:
    @given(tables)
    def test_roundtrip(self, t):
        mgr = Manager(NV)
        m = from_dense(mgr, t)
        assert np.array_equal(dense(mgr, m), t)
        assert mgr.check_structure() == []

    @given(tables)
    def test_same_function_same_node(self, t):
        mgr = Manager(NV)
        a = from_dense(mgr, t)
        b = from_dense(mgr, list(t))
        assert a == b
        # built a different way: a + 0 and a * 1
        assert a + 0 == a
        assert a * 1 == a

    def test_negative_zero_folds(self):
        mgr = Manager(1)
        assert mgr.const(-0.0) == mgr.const(0.0)

    def test_nan_rejected(self):
        mgr = Manager(1)
        with pytest.raises(MtbddError):
            mgr.const(float("nan"))

    def test_unknown_variable(self):
        mgr = Manager(["a", "b"])
        with pytest.raises(MtbddError):
            mgr.var("c")
        with pytest.raises(MtbddError):
            mgr.var(5)


ARITH = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "min": np.minimum,
    "max": np.maximum,
    ">": lambda a, b: (a > b).astype(float),
    ">=": lambda a, b: (a >= b).astype(float),
    "<": lambda a, b: (a < b).astype(float),
    "<=": lambda a, b: (a <= b).astype(float),
    "==": lambda a, b: (a == b).astype(float),
    "!=": lambda a, b: (a != b).astype(float),
}


@pytest.mark.parametrize("op", sorted(ARITH))
@settings(max_examples=30)
@given(t1=tables, t2=tables)
def test_apply_matches_pointwise(op, t1, t2):
    mgr = Manager(NV)
    a, b = from_dense(mgr, t1), from_dense(mgr, t2)
    r = mgr.apply(op, a, b)
    assert np.allclose(dense(mgr, r), ARITH[op](np.array(t1), np.array(t2)))
    if op in (">", ">=", "<", "<=", "==", "!="):
        assert isinstance(r, Bdd)


def test_divide_and_infinity():
    mgr = Manager(1)
    x = mgr.var(0)
    r = mgr.apply("/", mgr.const(1.0), x)
    assert mgr.evaluate(r, {0: 1}) == 1.0
    assert mgr.evaluate(r, {0: 0}) == math.inf
    # 0 * inf is 0
    assert (mgr.const(math.inf) * mgr.const(0.0)).value == 0.0
    with pytest.raises(MtbddError):
        mgr.const(math.inf) - mgr.const(math.inf)


def test_approx_equal():
    mgr = Manager(1)
    a = mgr.const(1.0)
    assert mgr.apply("~=", a, mgr.const(1.0 + 1e-9)).is_true
    assert mgr.apply("~=", a, mgr.const(1.1)).is_false
    assert mgr.apply("~=", a, mgr.const(1.1), eps=0.5).is_true


@settings(max_examples=40)
@given(bool_tables, bool_tables)
def test_boolean_connectives(t1, t2):
    mgr = Manager(NV)
    a = mgr.as_bdd(from_dense(mgr, t1))
    b = mgr.as_bdd(from_dense(mgr, t2))
    x, y = np.array(t1) > 0, np.array(t2) > 0
    assert np.array_equal(dense(mgr, a & b) > 0, x & y)
    assert np.array_equal(dense(mgr, a | b) > 0, x | y)
    assert np.array_equal(dense(mgr, ~a) > 0, ~x)
    assert np.array_equal(dense(mgr, a - b) > 0, x & ~y)


def test_boolean_op_rejects_real_terminals():
    mgr = Manager(1)
    with pytest.raises(MtbddError):
        mgr.and_(mgr.const(0.5), mgr.true)


@settings(max_examples=40)
@given(bool_tables, tables, tables)
def test_if_then_else(tb, t1, t2):
    mgr = Manager(NV)
    b = mgr.as_bdd(from_dense(mgr, tb))
    r = mgr.if_then_else(b, from_dense(mgr, t1), from_dense(mgr, t2))
    assert np.allclose(dense(mgr, r), np.where(np.array(tb) > 0, t1, t2))


class TestAbstraction:
    @pytest.mark.parametrize("op,red", [("+", np.sum), ("max", np.max), ("min", np.min)])
    @pytest.mark.parametrize("axes", [(0,), (1, 3), (0, 1, 2, 3), (2,), (3,)])
    @settings(max_examples=15)
    @given(t=tables)
    def test_against_dense(self, op, red, axes, t):
        mgr = Manager(NV)
        m = from_dense(mgr, t)
        r = mgr.abstract(op, axes, m)
        expect = red(np.array(t).reshape((2,) * NV), axis=axes, keepdims=True)
        expect = np.broadcast_to(expect, (2,) * NV).reshape(-1)
        assert np.allclose(dense(mgr, r), expect)
        assert not (mgr.support(r) & set(axes))

    def test_sum_counts_skipped_variables(self):
        mgr = Manager(3)
        # constant 1 summed over 3 variables is 8
        assert mgr.abstract("+", [0, 1, 2], mgr.const(1.0)).value == 8.0
        # depends on v1 only; summing over v0, v2 doubles twice
        r = mgr.abstract("+", [0, 2], mgr.var(1))
        assert mgr.evaluate(r, {1: 1}) == 4.0

    def test_exists_forall(self):
        mgr = Manager(2)
        x, y = mgr.var(0), mgr.var(1)
        assert mgr.exists([0], x & y) == y
        assert mgr.forall([0], x | y) == y

    def test_rejects_non_associative(self):
        mgr = Manager(1)
        with pytest.raises(MtbddError):
            mgr.abstract("-", [0], mgr.var(0))


class TestMatrixVector:
    def test_against_dense(self):
        rng = np.random.default_rng(3)
        k = 3
        # interleaved order r0 c0 r1 c1 r2 c2
        names = [n for i in range(k) for n in (f"r{i}", f"c{i}")]
        for _ in range(10):
            mgr = Manager(names)
            A = rng.choice([0.0, 0.0, 0.25, 0.5, 1.0], size=(1 << k, 1 << k))
            v = rng.choice([0.0, 1.0, 2.0, 0.3], size=1 << k)
            rows = []
            for i, j in itertools.product(range(1 << k), repeat=2):
                bits = []
                for b in range(k):
                    bits += [(i >> (k - 1 - b)) & 1, (j >> (k - 1 - b)) & 1]
                rows.append((bits, A[i, j]))
            M = mgr.from_minterms(range(2 * k), rows)
            V = mgr.from_minterms(
                [2 * b for b in range(k)],
                [([(i >> (k - 1 - b)) & 1 for b in range(k)], v[i]) for i in range(1 << k)],
            )
            R = mgr.mv_mult(M, V, [f"c{i}" for i in range(k)])
            got = [
                mgr.evaluate(R, {f"r{b}": (i >> (k - 1 - b)) & 1 for b in range(k)})
                for i in range(1 << k)
            ]
            assert np.allclose(got, A @ v)

    def test_skipped_variables(self):
        # matrix independent of column bit: each row sums v over both columns
        mgr = Manager(["r", "c"])
        M = mgr.const(1.0)
        V = mgr.if_then_else(mgr.var("r"), mgr.const(3.0), mgr.const(5.0))
        assert mgr.mv_mult(M, V, ["c"]).value == 8.0

    def test_vector_on_column_rejected(self):
        mgr = Manager(["r", "c"])
        with pytest.raises(MtbddError):
            mgr.mv_mult(mgr.const(1.0), mgr.var("c"), ["c"])


class TestRename:
    def test_order_preserving(self):
        mgr = Manager(["x", "xp", "y", "yp"])
        f = mgr.var("x") & ~mgr.var("y")
        g = mgr.replace_vars(f, ["x", "y"], ["xp", "yp"])
        assert g == mgr.var("xp") & ~mgr.var("yp")

    def test_order_reversing_uses_general_path(self):
        mgr = Manager(["a", "b", "c"])
        f = mgr.if_then_else(mgr.var("a"), mgr.const(2.0), mgr.var("b"))
        g = mgr.replace_vars(f, ["a", "b"], ["c", "a"])
        for bits in itertools.product((0, 1), repeat=3):
            val = dict(zip("abc", bits))
            expect = mgr.evaluate(f, {"a": val["c"], "b": val["a"], "c": 0})
            assert mgr.evaluate(g, val) == expect

    def test_target_in_support_rejected(self):
        mgr = Manager(["a", "b"])
        with pytest.raises(MtbddError):
            mgr.replace_vars(mgr.var("a") & mgr.var("b"), ["a"], ["b"])


def test_sup_norm():
    mgr = Manager(1)
    x = mgr.var(0)
    a = mgr.if_then_else(x, mgr.const(1.0), mgr.const(2.0))
    b = mgr.if_then_else(x, mgr.const(1.5), mgr.const(2.0))
    assert mgr.sup_norm(a, b, relative=False) == pytest.approx(0.5)
    assert mgr.sup_norm(a, b) == pytest.approx(0.5 / 1.5)
    assert mgr.sup_norm(a, a) == 0.0
    assert mgr.sup_norm(mgr.const(math.inf), mgr.const(math.inf)) == 0.0


def test_sat_count_and_minterms():
    mgr = Manager(3)
    b = mgr.var(0) | mgr.var(2)
    assert mgr.sat_count(b, [0, 1, 2]) == 6
    assert sorted(bits for bits, _ in mgr.minterms(b, [0, 1, 2])) == sorted(
        bits for bits in itertools.product((0, 1), repeat=3) if bits[0] or bits[2]
    )


def test_pick_least():
    mgr = Manager(["s", "a1", "a2"])
    s = mgr.var("s")
    # s=1: actions {01, 11}; s=0: actions {10, 11}
    allowed = mgr.if_then_else(s, mgr.var("a2"), mgr.var("a1"))
    picked = mgr.pick_least(allowed, ["a1", "a2"])
    assert mgr.minterms(picked, ["s", "a1", "a2"]) is not None
    assert sorted(b for b, _ in mgr.minterms(picked, ["s", "a1", "a2"])) == [(0, 1, 0), (1, 0, 1)]


def test_node_count_and_dot():
    mgr = Manager(["x", "y"])
    f = mgr.var("x") & mgr.var("y")
    assert mgr.node_count(f) == 4  # x, y, 1, 0
    dot = mgr.to_dot(f)
    assert "dashed" not in dot  # else edges all lead to 0
    assert 'label="x"' in dot and 'label="1"' in dot
    paths = list(mgr.enumerate_paths(f))
    assert paths == [({0: True, 1: True}, 1.0)]


def test_garbage_collection_keeps_live_handles():
    mgr = Manager(8, gc_threshold=50)
    keep = mgr.var(0)
    for i in range(1, 8):
        keep = keep + mgr.var(i) * float(i)
        _junk = [mgr.var(j) * float(j + 10) for j in range(8)]
    mgr.collect_garbage()
    assert mgr.check_structure() == []
    assert mgr.evaluate(keep, {i: 1 for i in range(8)}) == 1 + sum(range(1, 8))
    assert mgr.gc_runs > 0


def test_node_limit():
    mgr = Manager(16, max_nodes=20, gc_threshold=10)
    with pytest.raises(NodeLimitError):
        acc = mgr.const(0.0)
        hold = []
        for i in range(16):
            acc = acc + mgr.var(i) * float(i + 1)
            hold.append(acc)


class TestAlgebraicLaws:
    @settings(max_examples=100)
    @given(
        st.lists(st.booleans(), min_size=64, max_size=64),
        st.lists(st.booleans(), min_size=64, max_size=64),
    )
    def test_de_morgan_identical_handles(self, t1, t2):
        mgr = Manager(6)
        rows = list(itertools.product((0, 1), repeat=6))
        b1 = mgr.as_bdd(mgr.from_minterms(range(6), [(r, 1.0) for r, t in zip(rows, t1) if t]))
        b2 = mgr.as_bdd(mgr.from_minterms(range(6), [(r, 1.0) for r, t in zip(rows, t2) if t]))
        assert mgr.not_(mgr.and_(b1, b2)) == mgr.or_(mgr.not_(b1), mgr.not_(b2))
        assert mgr.and_(b1, mgr.not_(b1)) == mgr.const_(0)
        assert mgr.or_(b1, mgr.not_(b1)) == mgr.const_(1)

    @settings(max_examples=30)
    @given(tables, tables, tables)
    def test_plus_max_commutative_associative(self, t1, t2, t3):
        mgr = Manager(NV)
        a, b, c = (from_dense(mgr, t) for t in (t1, t2, t3))
        for op in ("+", "max"):
            assert mgr.apply(op, a, b) == mgr.apply(op, b, a)
            lhs = mgr.apply(op, mgr.apply(op, a, b), c)
            rhs = mgr.apply(op, a, mgr.apply(op, b, c))
            if op == "max":
                assert lhs == rhs
            else:
                # float addition is only associative on exactly representable sums
                assert np.allclose(dense(mgr, lhs), dense(mgr, rhs))

    @settings(max_examples=30)
    @given(tables)
    def test_abstraction_composes(self, t):
        mgr = Manager(NV)
        m = from_dense(mgr, t)
        for op in ("min", "max", "+"):
            whole = mgr.abstract_(op, [0, 2, 3], m)
            parts = mgr.abstract_(op, [0], mgr.abstract_(op, [2, 3], m))
            assert np.allclose(dense(mgr, whole), dense(mgr, parts))

    @settings(max_examples=20)
    @given(st.integers(1, 3), st.floats(-3, 3), st.integers(0, 10_000))
    def test_mv_mult_linearity(self, k, a, seed):
        rng = np.random.default_rng(seed)
        names = [n for i in range(k) for n in (f"r{i}", f"c{i}")]
        mgr = Manager(names)
        A = rng.random((1 << k, 1 << k))
        rows = []
        for i, j in itertools.product(range(1 << k), repeat=2):
            bits = []
            for b in range(k):
                bits += [(i >> (k - 1 - b)) & 1, (j >> (k - 1 - b)) & 1]
            rows.append((bits, A[i, j]))
        M = mgr.from_minterms(range(2 * k), rows)

        def vec(x):
            return mgr.from_minterms(
                [2 * b for b in range(k)],
                [([(i >> (k - 1 - b)) & 1 for b in range(k)], x[i]) for i in range(1 << k)],
            )

        v1, v2 = vec(rng.random(1 << k)), vec(rng.random(1 << k))
        cols = [f"c{i}" for i in range(k)]
        lhs = mgr.mv_mult(M, mgr.const_(a) * v1 + v2, cols)
        rhs = mgr.const_(a) * mgr.mv_mult(M, v1, cols) + mgr.mv_mult(M, v2, cols)
        assert mgr.sup_norm(lhs, rhs, relative=False) <= 1e-12


def test_small_worked_examples():
    mgr = Manager(["r", "c"])
    # [[0.5, 0.5], [0, 1]] times (0, 1)
    M = mgr.from_minterms([0, 1], [((0, 0), 0.5), ((0, 1), 0.5), ((1, 1), 1.0)])
    v = mgr.var("r") * 1.0
    r = mgr.mv_mult(M, v, ["c"])
    assert mgr.evaluate(r, {"r": 0}) == 0.5 and mgr.evaluate(r, {"r": 1}) == 1.0
    z = Manager(["z1"])
    m = z.if_then_else(z.var("z1"), z.const_(0.7), z.const_(0.2))
    assert z.abstract_("max", ["z1"], m) == z.const_(0.7)
    assert mgr.node_count(mgr.const_(0)) == 1
