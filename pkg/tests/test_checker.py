import math
import random

import numpy as np
import pytest

from symtsg.checker import (
    CheckError,
    ConvergenceError,
    SolverConfig,
    bounded_until,
    check,
    nash_2,
    next_op,
    prob0,
    prob1,
    reward_ops,
    threshold_sat,
    value_iter_reach,
)
from symtsg.generate import random_game
from symtsg.logic import Context, Cumulative, Instant, Objective, TrueF, Until, Atom, parse_property
from symtsg.model import encode

EXACT = SolverConfig(epsilon=1e-12)


def values(sym, text, cfg=EXACT):
    r = check(parse_property(text, Context.of(sym)), sym, cfg)
    return r, r.vector(sym)


class TestExampleValues:
    def test_reach_p1(self, example_sym):
        r, v = values(example_sym, '<<p1>> Pmax=? [ F "goal" ]')
        assert v == pytest.approx([1, 1, 1])
        assert r.init_value == pytest.approx(1.0)

    def test_reach_p2(self, example_sym):
        _, v = values(example_sym, '<<p2>> Pmax=? [ F "goal" ]')
        assert v == pytest.approx([0, 1, 1])

    def test_min_reward(self, example_sym):
        _, v = values(example_sym, '<<p1>> R{"steps"}min=? [ F "goal" ]')
        assert v == pytest.approx([2, 10 / 9, 0], abs=1e-9)

    def test_max_reward_infinite(self, example_sym):
        r, v = values(example_sym, '<<p1>> R{"steps"}max=? [ F "goal" ]')
        assert math.isinf(v[0]) and v[1] == pytest.approx(10 / 9)
        assert r.stats["infinite"] == 1
        # staying put forever keeps the value infinite
        assert r.strategy.as_map()[0] == {"a"}

    @pytest.mark.parametrize("k,expected", [(0, 0.0), (1, 0.1), (2, 0.91)])
    def test_bounded(self, example_sym, k, expected):
        _, v = values(example_sym, f'<<p1>> Pmax=? [ F<={k} "goal" ]')
        assert v[0] == pytest.approx(expected)

    @pytest.mark.parametrize("coalition,expected", [("p1", 0.9), ("p2", 0.0)])
    def test_next(self, example_sym, coalition, expected):
        _, v = values(example_sym, f'<<{coalition}>> Pmax=? [ X "one" ]')
        assert v[0] == pytest.approx(expected)

    def test_globally(self, example_sym):
        # p1 loops on a forever; as the opponent of p2 it would play b instead
        _, v = values(example_sym, '<<p1>> Pmax=? [ G !"goal" ]')
        assert v == pytest.approx([1, 0, 0])
        _, v = values(example_sym, '<<p2>> Pmax=? [ G !"goal" ]')
        assert v == pytest.approx([0, 0, 0])

    def test_instant_and_cumulative(self, example_sym):
        _, v = values(example_sym, '<<p1>> R{"steps"}min=? [ I=1 ]')
        assert v == pytest.approx([0.9, 0.1, 0])
        _, v = values(example_sym, '<<p1>> R{"steps"}max=? [ C<=3 ]')
        assert v == pytest.approx([3, 1.11, 0])

    def test_threshold(self, example_sym):
        r, _ = values(example_sym, '<<p2>> P>=0.5 [ F "goal" ]')
        assert example_sym.to_set(r.sat) == {1, 2}
        assert r.init_value is False

    def test_boolean_combination(self, example_sym):
        r, _ = values(example_sym, '"one" | <<p1>> P>0.5 [ X "goal" ]')
        assert example_sym.to_set(r.sat) == {1, 2}

    def test_nested(self, example_sym):
        # p1 can keep F goal below 1/2 only at s0, which s1 and s2 never reach
        r, v = values(example_sym, '<<p1>> Pmax=? [ F <<p1>> P<0.5 [ F "goal" ] ]')
        assert v == pytest.approx([1, 0, 0])


class TestStrategies:
    def test_p1_plays_b(self, example_sym):
        r, _ = values(example_sym, '<<p1>> Pmax=? [ F "goal" ]')
        assert r.strategy.as_map() == {0: {"b"}}

    def test_opponent_plays_a_when_p2_maximises(self, example_sym):
        r, _ = values(example_sym, '<<p2>> Pmax=? [ F "goal" ]')
        assert r.opponent_strategy.as_map()[0] == {"a"}
        assert r.strategy.as_map()[1] == {"a"}

    def test_min_reward_strategy(self, example_sym):
        r, _ = values(example_sym, '<<p1>> R{"steps"}min=? [ F "goal" ]')
        assert r.strategy.as_map()[0] == {"b"}
        assert r.stats["strategy_nodes"] == r.strategy.size() > 0

    def test_text_and_dot(self, example_sym):
        r, _ = values(example_sym, '<<p1>> Pmax=? [ F "goal" ]')
        assert r.strategy.to_text() == "(s=0) -> b\n"
        assert r.strategy.to_dot().startswith("digraph")

    def test_lexicographic_tie_break(self):
        # both actions reach the target surely; the least rank wins
        from symtsg.model import ExplicitTsg

        g = ExplicitTsg(("p", "q"), ("s",), ((0,), (1,)), (0, 1), 0, ("a", "b"),
                        {(0, 0): ((1, 1.0),), (0, 1): ((1, 1.0),), (1, 0): ((1, 1.0),)}, {"t": frozenset({1})})
        sym = encode(g)
        f = parse_property('<<p>> Pmax=? [ F "t" ]')
        keep = check(f, sym, SolverConfig()).strategy.as_map()
        least = check(f, sym, SolverConfig(tie_break="lexicographic-least")).strategy.as_map()
        assert keep[0] == {"a", "b"} and least[0] == {"a"}


class TestQualitative:
    def test_prob0_prob1_example(self, example_sym):
        sym = example_sym
        mgr = sym.manager
        goal = sym.label("goal")
        p1, p2 = sym.coalition_cube([0]), sym.coalition_cube([1])
        assert sym.to_set(prob1(sym.reach, goal, p1, sym)) == {0, 1, 2}
        assert sym.to_set(prob0(sym.reach, goal, p2, sym)) == {0}
        assert sym.to_set(prob1(sym.reach, goal, p2, sym)) == {1, 2}
        assert prob0(sym.reach, goal, p1, sym).is_false
        # avoiding s1 leaves only the direct 0.1 branch
        stay = mgr.and_(sym.reach, mgr.not_(sym.label("one")))
        assert sym.to_set(prob1(stay, goal, p1, sym)) == {2}

    def test_bound_shortcuts(self, example_sym):
        for text, states in [('<<p2>> P>0 [ F "goal" ]', {1, 2}), ('<<p2>> P>=1 [ F "goal" ]', {1, 2}),
                             ('<<p1>> P<=0 [ F "goal" ]', {0}), ('<<p2>> P<1 [ F "goal" ]', set())]:
            r, _ = values(example_sym, text)
            assert r.stats.get("qualitative")
            assert example_sym.to_set(r.sat) == states

    @pytest.mark.parametrize("seed", range(4))
    def test_sets_agree_with_values(self, seed):
        g = random_game(random.Random(seed), 12)
        sym = encode(g)
        r, v = values(sym, '<<p1>> Pmax=? [ F "a" ]')
        assert r.stats["prob0"] == int(np.sum(v == 0))
        assert r.stats["prob1"] == int(np.sum(v == 1))


class TestLowLevel:
    def test_value_iter_reach(self, example_sym):
        sym = example_sym
        v, strat = value_iter_reach(sym, [1], sym.label("goal"), sym.reach, EXACT)
        assert sym.to_vector(v) == pytest.approx([0, 1, 1])
        assert strat.as_map()[1] == {"a"}

    def test_bounded_and_next(self, example_sym):
        sym = example_sym
        goal = sym.label("goal")
        assert sym.to_vector(bounded_until(sym, [0], sym.reach, goal, 2)) == pytest.approx([0.91, 0.99, 1])
        assert sym.to_vector(next_op(sym, [0], sym.label("one"))) == pytest.approx([0.9, 0.1, 0])
        with pytest.raises(CheckError):
            bounded_until(sym, [0], sym.reach, goal, -1)

    def test_reward_ops(self, example_sym):
        sym = example_sym
        v, strat = reward_ops(sym, [0], "steps", sym.label("goal"), EXACT)
        assert sym.to_vector(v) == pytest.approx([math.inf, 10 / 9, 0])
        assert strat.as_map() == {0: {"a"}}
        v, _ = reward_ops(sym, [1], "steps", sym.label("goal"), EXACT)
        assert sym.to_vector(v) == pytest.approx([2, 10 / 9, 0])
        v, strat = reward_ops(sym, [0], "steps", Cumulative(2))
        assert strat is None and sym.to_vector(v) == pytest.approx([2, 1.1, 0])
        v, _ = reward_ops(sym, [0], "steps", Instant(0))
        assert sym.to_vector(v) == pytest.approx([1, 1, 0])
        with pytest.raises(CheckError):
            reward_ops(sym, [0], "nope", Instant(0))

    def test_threshold_sat_is_exact(self, example_sym):
        sym = example_sym
        v = bounded_until(sym, [0], sym.reach, sym.label("goal"), 1)
        assert sym.to_set(threshold_sat(v, ">=", 0.1, sym.reach)) == {0, 1, 2}
        assert sym.to_set(threshold_sat(v, ">", 0.1, sym.reach)) == {1, 2}

    def test_nash_2(self, example_sym):
        sym = example_sym
        objs = [Objective("P", Until(TrueF(), Atom("two"))), Objective("P", Until(TrueF(), Atom("one")))]
        (v1, v2), profile = nash_2(sym, [0], [1], objs, "max", EXACT)
        assert sym.to_vector(v1)[0] == pytest.approx(1.0)
        assert sym.to_vector(v2)[0] == pytest.approx(0.9)
        assert profile.as_map()[0] == {"b"}
        with pytest.raises(CheckError, match="partition"):
            nash_2(sym, [0], [0, 1], objs)


class TestNash:
    def test_example_social_welfare(self, example_sym):
        r, v = values(example_sym, '<<p1:p2>>max=? ( P[ F "two" ] + P[ F "one" ] )')
        assert r.init_value == pytest.approx(1.9, abs=1e-9)
        assert r.strategy.as_map()[0] == {"b"}
        v1, v2 = (example_sym.to_vector(c) for c in r.coalition_values)
        assert v1 + v2 == pytest.approx(v)

    def test_threshold(self, example_sym):
        r, _ = values(example_sym, '<<p1:p2>>max>=1.5 ( P[ F "two" ] + P[ F "one" ] )')
        assert r.init_value is True

    def test_unsupported_objectives(self, example_sym):
        with pytest.raises(CheckError):
            values(example_sym, '<<p1:p2>>max=? ( P[ F<=2 "two" ] + P[ F "one" ] )')
        with pytest.raises(CheckError, match="almost surely"):
            values(example_sym, '<<p1:p2>>min=? ( R{"steps"}[ F "goal" ] + R{"steps"}[ F "goal" ] )')


class TestIteration:
    def test_convergence_error(self):
        g = random_game(random.Random(11), 40)
        sym = encode(g)
        with pytest.raises(ConvergenceError) as info:
            values(sym, '<<p1>> Pmax=? [ F "a" ]', SolverConfig(epsilon=1e-12, max_iters=1))
        assert info.value.iterations == 1 and info.value.trace

    def test_run_stats(self, example_sym):
        r, _ = values(example_sym, '<<p2>> Pmin=? [ F "one" ]')
        for key in ("total_time", "qual_time", "quant_time", "iterations", "prob0", "prob1", "maybe"):
            assert key in r.stats
        for run in r.stats["runs"]:
            assert run["converged"] and run["monotone"]

    @pytest.mark.parametrize("seed", range(3))
    def test_reach_is_monotone(self, seed):
        sym = encode(random_game(random.Random(seed), 25))
        r, _ = values(sym, '<<p1>> Pmin=? [ "b" U "a" ]')
        assert all(run["monotone"] for run in r.stats["runs"])

    def test_looser_epsilon_fewer_iterations(self):
        sym = encode(random_game(random.Random(5), 30))
        f = '<<p2>> Pmax=? [ F "a" ]'
        loose, _ = values(sym, f, SolverConfig(epsilon=1e-3))
        tight, _ = values(sym, f, SolverConfig(epsilon=1e-9))
        assert loose.stats["iterations"] <= tight.stats["iterations"]

    def test_bad_config(self):
        with pytest.raises(ValueError):
            SolverConfig(epsilon=0)
        with pytest.raises(ValueError):
            SolverConfig(tie_break="random")

    def test_unknown_label(self, example_sym):
        with pytest.raises(CheckError):
            check(parse_property('<<p1>> Pmax=? [ F "nope" ]'), example_sym)
