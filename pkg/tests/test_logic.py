import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symtsg.generate import random_query
from symtsg.logic import (
    And,
    Atom,
    Bound,
    Context,
    Cumulative,
    Instant,
    Nash,
    Next,
    Not,
    Objective,
    Or,
    PropertyError,
    ReachReward,
    TrueF,
    Until,
    ZeroSumP,
    ZeroSumR,
    dualize,
    parse_properties,
    parse_property,
    pretty,
)

PLAYERS = ("p1", "p2", "p3")
CTX = Context(PLAYERS, frozenset({"a", "b", "goal"}), ("r", "s"))


class TestParse:
    def test_reach_query(self):
        f = parse_property('<<p1>> Pmax=? [ F "goal" ]')
        assert f == ZeroSumP(("p1",), Until(TrueF(), Atom("goal")), None, "max")

    def test_bounded_until_threshold(self):
        f = parse_property('<<p1,p2>> P>=0.5 [ "a" U<=3 "b" ]')
        assert f == ZeroSumP(("p1", "p2"), Until(Atom("a"), Atom("b"), 3), Bound(">=", 0.5))

    def test_strict_step_bound(self):
        f = parse_property('<<p1>> Pmin=? [ F<4 "a" ]')
        assert f.path.k == 3

    def test_next(self):
        assert parse_property('<<p2>> Pmin=? [ X !"a" ]').path == Next(Not(Atom("a")))

    def test_globally_stored_as_negated_eventually(self):
        f = parse_property('<<p1>> P>=0.7 [ G<=2 "a" ]')
        assert f.path == Until(TrueF(), Not(Atom("a")), 2, negated=True)
        assert f.bound == Bound("<=", 0.3)

    def test_globally_query_flips_opt(self):
        f = parse_property('<<p1>> Pmax=? [ G "a" ]')
        assert f.opt == "min" and f.path.negated

    @pytest.mark.parametrize(
        "text,rho",
        [("I=3", Instant(3)), ("C<=4", Cumulative(4)), ('F "goal"', ReachReward(Atom("goal")))],
    )
    def test_reward_formulas(self, text, rho):
        f = parse_property(f'<<p1>> R{{"r"}}min=? [ {text} ]')
        assert f == ZeroSumR(("p1",), "r", rho, None, "min")

    def test_default_reward_from_context(self):
        assert parse_property('<<p1>> Rmax=? [ C<=2 ]', CTX).reward == "r"

    def test_boolean_structure(self):
        f = parse_property('"a" & !"b" | true')
        assert f == Or(And(Atom("a"), Not(Atom("b"))), TrueF())

    def test_nested_operator(self):
        f = parse_property('<<p1>> P>=0.5 [ F <<p2>> P<0.1 [ X "a" ] ]')
        assert isinstance(f.path.right, ZeroSumP)

    def test_nash(self):
        f = parse_property('<<p1:p2,p3>>max=? ( P[ F "a" ] + P[ G "b" ] )', CTX)
        assert isinstance(f, Nash)
        assert f.coalitions == (("p1",), ("p2", "p3"))
        assert f.objectives[1] == Objective("P", Until(TrueF(), Not(Atom("b")), None, negated=True))

    def test_nash_reward_threshold(self):
        f = parse_property('<<p1:p2>>min<=4 ( R{"r"}[ F "a" ] + R{"s"}[ C<=3 ] )')
        assert f.bound == Bound("<=", 4.0) and f.opt == "min"

    def test_coalitions_ordered_by_context(self):
        assert parse_property('<<p3,p1>> Pmax=? [ F "a" ]', CTX).coalition == ("p1", "p3")


class TestErrors:
    def test_nash_must_partition(self):
        with pytest.raises(PropertyError, match="cover every player"):
            parse_property('<<p1:p2>>max=? ( P[ F "a" ] + P[ F "b" ] )', CTX)

    def test_nash_disjoint(self):
        with pytest.raises(PropertyError, match="disjoint"):
            parse_property('<<p1:p1>>max=? ( P[ F "a" ] + P[ F "b" ] )')

    def test_three_coalitions_unsupported(self):
        with pytest.raises(PropertyError, match="not supported"):
            parse_property('<<p1:p2:p3>>max=? ( P[ F "a" ] + P[ F "b" ] + P[ F "a" ] )', CTX)

    def test_mixed_objectives(self):
        with pytest.raises(PropertyError, match="all P or all R"):
            parse_property('<<p1:p2>>max=? ( P[ F "a" ] + R{"r"}[ F "b" ] )')

    def test_objective_count(self):
        with pytest.raises(PropertyError, match="2 coalitions but 1 objectives"):
            parse_property('<<p1:p2>>max=? ( P[ F "a" ] )')

    @pytest.mark.parametrize("v", ["1.5", "-0.1"])
    def test_probability_threshold_range(self, v):
        with pytest.raises(PropertyError):
            parse_property(f'<<p1>> P>={v} [ F "a" ]')

    def test_negative_reward_threshold(self):
        with pytest.raises(PropertyError):
            parse_property('<<p1>> R{"r"}>=-1 [ F "a" ]')

    def test_unknown_names(self):
        with pytest.raises(PropertyError, match="unknown player"):
            parse_property('<<p9>> Pmax=? [ F "a" ]', CTX)
        with pytest.raises(PropertyError, match="unknown reward"):
            parse_property('<<p1>> R{"zz"}max=? [ F "a" ]', CTX)

    def test_trailing_input(self):
        with pytest.raises(PropertyError, match="trailing"):
            parse_property('"a" "b"')

    def test_threshold_with_opt_rejected(self):
        with pytest.raises(PropertyError):
            parse_property('<<p1>> Pmax>=0.5 [ F "a" ]')


class TestDualize:
    def test_swaps_coalition_and_opt(self):
        f = parse_property('<<p1>> Pmax=? [ F "a" ]')
        d = dualize(f, PLAYERS)
        assert d.coalition == ("p2", "p3") and d.opt == "min" and d.path == f.path

    def test_reward(self):
        f = parse_property('<<p2>> R{"r"}min=? [ F "a" ]')
        d = dualize(f, PLAYERS)
        assert d.coalition == ("p1", "p3") and d.opt == "max" and d.reward == "r"

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_involution(self, seed):
        rng = random.Random(seed)
        f = random_query(rng, PLAYERS)
        if isinstance(f, Nash):
            return
        assert dualize(dualize(f, PLAYERS), PLAYERS) == f

    def test_threshold_formula_has_no_dual(self):
        with pytest.raises(PropertyError):
            dualize(parse_property('<<p1>> P>=0.5 [ F "a" ]'), PLAYERS)


class TestPretty:
    @pytest.mark.parametrize(
        "text",
        [
            '<<p1>> Pmax=? [ F "goal" ]',
            '<<p1,p2>> P>=0.5 [ "a" U<=3 "b" ]',
            '<<p1>> P<0.3 [ G<=2 "a" ]',
            '<<p2>> R{"r"}min=? [ C<=4 ]',
            '<<p1:p2,p3>>max=? ( P[ F "a" ] + P[ G "b" ] )',
            '!("a" | "b") & true',
        ],
    )
    def test_examples_roundtrip(self, text):
        f = parse_property(text)
        assert parse_property(pretty(f)) == f

    def test_globally_printed_back(self):
        assert pretty(parse_property('<<p1>> P<0.3 [ G<=2 "a" ]')) == '<<p1>> P<0.3 [ G<=2 "a" ]'

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 100_000))
    def test_parse_pretty_identity(self, seed):
        f = random_query(random.Random(seed), PLAYERS)
        assert parse_property(pretty(f)) == f


class TestPropertyFiles:
    def test_names_comments_and_errors(self):
        text = '// header\n"reach": <<p1>> Pmax=? [ F "a" ]\n\n<<p2>> Pmin=? [ X "b" ] // trailing\n"bad": <<p1>> P>=2 [ F "a" ]\n'
        out = parse_properties(text)
        assert [n for n, _, _ in out] == ["reach", None, "bad"]
        assert out[1][1] == '<<p2>> Pmin=? [ X "b" ]'
        assert isinstance(out[0][2], ZeroSumP)
        assert isinstance(out[2][2], PropertyError)

    def test_bundled_example(self, example_game):
        from .conftest import MODELS

        out = parse_properties((MODELS / "example.props").read_text(), Context.of(example_game))
        assert [n for n, _, _ in out] == ["p1_reach", "p2_reach", "p1_steps", "swne"]
        assert not any(isinstance(f, PropertyError) for _, _, f in out)
