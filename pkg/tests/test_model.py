import random

import numpy as np
import pytest

from symtsg.generate import random_game
from symtsg.model import (
    Coalition,
    ExplicitTsg,
    ModelError,
    RewardStructure,
    decode,
    encode,
    format_text,
    parse_text,
    player_partition_bdds,
    reachable,
    validate,
)

from .conftest import MODELS

# (w1 w2, z1, x1 x2, y1 y2) -> probability for the three-state example
EXAMPLE_ROWS = {
    ((1, 0), (0,), (0, 0), (0, 0)): 1.0,
    ((1, 0), (1,), (0, 0), (0, 1)): 0.9,
    ((1, 0), (1,), (0, 0), (1, 0)): 0.1,
    ((0, 1), (0,), (0, 1), (0, 1)): 0.1,
    ((0, 1), (0,), (0, 1), (1, 0)): 0.9,
    ((1, 0), (0,), (1, 0), (1, 0)): 1.0,
}


def example_explicit() -> ExplicitTsg:
    return parse_text((MODELS / "example.txt").read_text())


def nonzero_rows(sym):
    mgr = sym.manager
    order = sym.w + sym.z + [v for pair in zip(sym.x, sym.y) for v in pair]
    out = {}
    for bits, p in mgr.minterms(sym.trans, order):
        if p == 0:
            continue
        nw, nz = len(sym.w), len(sym.z)
        inter = bits[nw + nz :]
        out[(tuple(bits[:nw]), tuple(bits[nw : nw + nz]), tuple(inter[0::2]), tuple(inter[1::2]))] = p
    return out


class TestEncoding:
    def test_example_rows_exact(self):
        sym = encode(example_explicit())
        assert nonzero_rows(sym) == EXAMPLE_ROWS

    def test_variable_order(self):
        sym = encode(example_explicit())
        order = sym.w + sym.z + [v for pair in zip(sym.x, sym.y) for v in pair] + sym.zp
        assert order == sorted(order)
        assert [sym.manager.names[v] for v in sym.w] == ["w1", "w2"]

    def test_single_self_loop(self):
        g = ExplicitTsg(("p",), ("s",), ((0,),), (0,), 0, ("go",), {(0, 0): ((0, 1.0),)})
        sym = encode(g)
        mgr = sym.manager
        assert mgr.terminal_values(sym.trans) == {0.0, 1.0}
        assert sym.manager.sat_count(sym.trans01, sym.w + sym.z + sym.x + sym.y) == 1

    def test_row_sums_are_one(self):
        g = random_game(random.Random(3), 30, n_players=3)
        sym = encode(g)
        mgr = sym.manager
        sums = mgr.abstract("+", sym.y, mgr.abstract("+", sym.w, sym.trans))
        rows = mgr.exists(sym.w, sym.rows)
        err = mgr.apply("*", mgr.apply("-", sums, mgr.const(1.0)), rows)
        assert max(abs(v) for v in mgr.terminal_values(err)) <= 1e-9
        # nothing outside the enabled rows
        assert mgr.and_(mgr.nonzero(sums), mgr.not_(rows)).is_false

    def test_rows_only_under_owner(self):
        g = random_game(random.Random(4), 25, n_players=3)
        sym = encode(g)
        mgr = sym.manager
        for s in range(g.num_states):
            others = mgr.disjoin(c for i, c in enumerate(sym.player_cubes) if i != g.owner[s])
            stray = mgr.and_(mgr.and_(sym.trans01, others), sym.state_cube(sym.codes[s]))
            assert stray.is_false

    @pytest.mark.parametrize("seed", range(5))
    def test_roundtrip_random(self, seed):
        g = random_game(random.Random(seed), 20, n_players=2 + seed % 2)
        assert decode(encode(g)).same_as(g)

    def test_roundtrip_example(self):
        d = decode(encode(example_explicit()))
        assert d.num_states == 3 and d.num_transitions == 6

    def test_empty_labels(self):
        g = ExplicitTsg(("p",), ("s",), ((0,),), (0,), 0, ("go",), {(0, 0): ((0, 1.0),)})
        assert decode(encode(g)).labels == {}


class TestReachable:
    def test_example_all_reachable(self):
        sym = encode(example_explicit())
        assert sym.to_set(reachable(sym)) == {0, 1, 2}

    def test_unreferenced_code_excluded(self):
        # 3 states need 2 bits; code 3 is never a state
        sym = encode(example_explicit())
        assert sym.manager.sat_count(reachable(sym), sym.x) == 3

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_bfs(self, seed):
        rng = random.Random(seed)
        g = random_game(rng, 15)
        # drop the spanning tree's guarantee by retargeting the start
        g = ExplicitTsg(g.players, g.state_vars, g.states, g.owner, rng.randrange(15), g.actions, g.delta, g.labels, g.rewards)
        seen, todo = {g.init}, [g.init]
        while todo:
            s = todo.pop()
            for (u, _), dist in g.delta.items():
                if u == s:
                    for t, _ in dist:
                        if t not in seen:
                            seen.add(t)
                            todo.append(t)
        sym = encode(g)
        # states are encoded by their index
        assert set(sym.codes) == seen
        assert sym.num_states == len(seen)


class TestValidate:
    def test_example_clean(self):
        assert validate(example_explicit()) == []

    def test_bad_sum(self):
        g = ExplicitTsg(("p",), ("s",), ((0,), (1,)), (0, 0), 0, ("go",), {(0, 0): ((0, 0.5), (1, 0.3)), (1, 0): ((1, 1.0),)})
        diags = validate(g)
        assert any("sums to 0.8" in d for d in diags)

    def test_deadlock(self):
        g = ExplicitTsg(("p",), ("s",), ((0,), (1,)), (0, 0), 0, ("go",), {(0, 0): ((1, 1.0),)})
        assert any("deadlock" in d for d in validate(g))

    def test_negative_reward(self):
        g = ExplicitTsg(("p",), ("s",), ((0,),), (0,), 0, ("go",), {(0, 0): ((0, 1.0),)}, rewards={"r": RewardStructure({0: -1.0}, {})})
        assert any("invalid value" in d for d in validate(g))


class TestPartition:
    def test_example_coalitions(self):
        sym = encode(example_explicit())
        mgr = sym.manager
        w1, w2 = sym.w
        p1, p2 = player_partition_bdds(sym, [0])
        assert mgr.evaluate(p1, {w1: 1, w2: 0}) == 1 and mgr.evaluate(p1, {w1: 0, w2: 1}) == 0
        assert mgr.evaluate(p2, {w1: 0, w2: 1}) == 1 and mgr.evaluate(p2, {w1: 1, w2: 0}) == 0

    def test_degenerate(self):
        sym = encode(example_explicit())
        mgr = sym.manager
        _, rest = player_partition_bdds(sym, [0, 1])
        none, _ = player_partition_bdds(sym, [])
        for b in (rest, none):
            for cube in sym.player_cubes:
                assert mgr.and_(b, cube).is_false

    def test_unknown_player(self):
        sym = encode(example_explicit())
        with pytest.raises(ModelError):
            player_partition_bdds(sym, [5])

    def test_coalition_by_name(self):
        c = Coalition.of(("p1", "p2", "p3"), ["p3", 0])
        assert c.members == frozenset({0, 2})
        assert c.complement(3).members == frozenset({1})


class TestTextFormat:
    @pytest.mark.parametrize("seed", range(3))
    def test_roundtrip(self, seed):
        g = random_game(random.Random(seed), 12)
        assert parse_text(format_text(g)).same_as(g)

    def test_bad_sum_rejected(self):
        text = "tsg 1 1\nplayer 1 p\nstate 0 1\ntr 0 go 0:0.7\n"
        with pytest.raises(ModelError):
            parse_text(text)

    def test_labels_and_rewards(self):
        g = example_explicit()
        assert g.labels["goal"] == frozenset({2})
        assert np.array_equal(g.rewards["steps"].state_vector(3), [1.0, 1.0, 0.0])
