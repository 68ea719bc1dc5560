import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symtsg.generate import random_tsg_source
from symtsg.lang import (
    Binary,
    LangError,
    build_explicit,
    build_symbolic,
    load_model,
    parse_expression,
    parse_model,
    pretty,
)
from symtsg.model import decode, to_bits

from .conftest import MODELS

SYNC = """
tsg
player p1 [go] endplayer

module left
  x : [0..1] init 0;
  [go] x=0 -> 0.5:(x'=1) + 0.5:(x'=0);
  [go] x=1 -> true;
endmodule

module right
  y : [0..1] init 0;
  [go] y=0 -> 0.9:(y'=1) + 0.1:(y'=0);
  [go] y=1 -> true;
endmodule
"""


def both(src: str, overrides=None):
    ast = parse_model(src)
    return build_explicit(ast, overrides), build_symbolic(ast, overrides)


class TestParse:
    def test_example_structure(self, example_ast):
        assert len(example_ast.modules) == 1
        assert len(example_ast.modules[0].commands) == 3
        assert [p.name for p in example_ast.players] == ["p1", "p2"]

    def test_empty_module_body(self):
        with pytest.raises(LangError, match="expected command or endmodule"):
            parse_model("tsg\nplayer p1 m endplayer\nmodule m\nendmodule\n")

    def test_probability_expression_node(self):
        ast = parse_model("tsg\nmodule m\n x : [0..1] init 0;\n [a] x=0 -> 0.5+0.5:(x'=1);\nendmodule\n")
        prob = ast.modules[0].commands[0].updates[0].prob
        assert isinstance(prob, Binary) and prob.op == "+"

    def test_positions_in_errors(self):
        with pytest.raises(LangError) as info:
            parse_model("tsg\nplayer p1 m endplayer\nmodule m\n x:[0..1] init 0;\n 5\nendmodule\n")
        assert "5:2" in str(info.value)

    def test_duplicate_constant(self):
        src = "tsg\nconst int N = 2;\nconst int N = 3;\nplayer p1 m endplayer\nmodule m\n x:[0..1] init 0;\n [a] true -> true;\nendmodule\n"
        with pytest.raises(LangError, match="duplicate"):
            parse_model(src)

    def test_expression_precedence(self):
        e = parse_expression("a | b & c = 1 + 2 * 3")
        assert e.op == "|" and e.right.op == "&" and e.right.right.op == "="

    @pytest.mark.parametrize("name", ["example", "dice", "avoid", "investors", "task_graph"])
    def test_pretty_is_fixpoint(self, name):
        once = pretty(load_model(MODELS / f"{name}.tsg"))
        twice = pretty(parse_model(once))
        assert once == twice

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000))
    def test_pretty_fixpoint_random(self, seed):
        once = pretty(parse_model(random_tsg_source(random.Random(seed))))
        assert pretty(parse_model(once)) == once


class TestBuildExplicit:
    def test_example_owners(self, example_game):
        assert example_game.num_states == 3
        assert example_game.owner == (0, 1, 0)

    def test_sync_product(self):
        g = parse_model(SYNC)
        eg = build_explicit(g)
        dist = dict(eg.delta[(0, 0)])
        # states are ordered by (x, y)
        index = {s: i for i, s in enumerate(eg.states)}
        got = [dist[index[(x, y)]] for x, y in [(0, 0), (0, 1), (1, 0), (1, 1)]]
        assert got == pytest.approx([0.05, 0.45, 0.05, 0.45], abs=1e-12)
        assert sorted(got) == pytest.approx([0.05, 0.05, 0.45, 0.45])

    def test_ownership_conflict(self):
        src = "tsg\nplayer p1 [a] endplayer\nplayer p2 [b] endplayer\nmodule m\n x:[0..1] init 0;\n [a] x=0 -> (x'=1);\n [b] x=0 -> (x'=0);\n [a] x=1 -> true;\nendmodule\n"
        for build in (build_explicit, build_symbolic):
            with pytest.raises(LangError, match="multiple players controlling actions in the same state"):
                build(parse_model(src))

    def test_deadlock(self):
        src = "tsg\nplayer p1 m endplayer\nmodule m\n x:[0..1] init 0;\n [] x=0 -> (x'=1);\nendmodule\n"
        for build in (build_explicit, build_symbolic):
            with pytest.raises(LangError, match="deadlock"):
                build(parse_model(src))

    def test_bad_probability_sum(self):
        src = "tsg\nplayer p1 m endplayer\nmodule m\n x:[0..1] init 0;\n [] x=0 -> 0.5:(x'=1) + 0.3:(x'=0);\n [] x=1 -> true;\nendmodule\n"
        for build in (build_explicit, build_symbolic):
            with pytest.raises(LangError, match="sum"):
                build(parse_model(src))

    def test_unknown_identifier(self):
        src = "tsg\nplayer p1 m endplayer\nmodule m\n x:[0..1] init 0;\n [a] y=0 -> true;\nendmodule\n"
        with pytest.raises(LangError, match="unknown identifier 'y'"):
            build_explicit(parse_model(src))

    def test_unlabelled_command_name(self):
        src = "tsg\nplayer p1 m endplayer\nmodule m\n x:[0..1] init 0;\n [] true -> true;\nendmodule\n"
        eg, sym = both(src)
        assert eg.actions == ("_tau_m_5",)
        assert sym.actions == ["_tau_m_5"]

    def test_module_owner_fallback_warns(self, example_ast):
        warnings = []
        build_explicit(example_ast, warnings=warnings)
        assert any("using the owner of module 'game'" in w for w in warnings)

    def test_boolean_update_expression(self):
        src = """
tsg
player p1 m endplayer
module m
  c : [0..2] init 0;
  d : bool init false;
  [go] !d -> (d'=d | c=1) & (c'=min(c+1,2));
  [stop] d -> true;
endmodule
"""
        eg, sym = both(src)
        assert decode(sym).same_as(eg)
        assert eg.num_states == 3


class TestBuildSymbolic:
    def test_example_entry(self, example_sym):
        sym = example_sym
        mgr = sym.manager
        val = dict(zip(sym.w, (1, 0)))
        val.update(zip(sym.z, to_bits(sym.actions.index("b"), len(sym.z))))
        val.update(zip(sym.x, to_bits(0, len(sym.x))))
        val.update(zip(sym.y, to_bits(1, len(sym.y))))
        assert mgr.evaluate(sym.trans, val) == 0.9

    def test_matches_explicit_example(self, example_sym, example_game):
        assert decode(example_sym).same_as(example_game)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_models_agree(self, seed):
        src = random_tsg_source(random.Random(seed))
        eg, sym = both(src)
        assert decode(sym).same_as(eg, tol=1e-12)

    @pytest.mark.parametrize(
        "name,overrides",
        [("dice", {"N": "3"}), ("avoid", {"K": "3"}), ("investors", {"H": "3"}), ("task_graph", None)],
    )
    def test_bundled_models_agree(self, name, overrides):
        ast = load_model(MODELS / f"{name}.tsg")
        eg = build_explicit(ast, overrides)
        sym = build_symbolic(ast, overrides)
        assert decode(sym).same_as(eg, tol=1e-12)

    def test_row_sums(self, example_sym):
        sym = example_sym
        mgr = sym.manager
        sums = mgr.abstract("+", sym.y, mgr.abstract("+", sym.w, sym.trans))
        rows = mgr.and_(mgr.exists(sym.w, sym.rows), sym.reach)
        vals = {v for v in mgr.terminal_values(mgr.if_then_else(rows, sums, mgr.const(1.0)))}
        assert vals == {1.0}


class TestOverrides:
    def test_override_equals_literal(self):
        src = (MODELS / "dice.tsg").read_text()
        a = build_explicit(parse_model(src), {"N": "3"})
        b = build_explicit(parse_model(src.replace("const int N = 10;", "const int N = 3;")))
        assert a.same_as(b)
        sa = build_symbolic(parse_model(src), {"N": 3})
        assert decode(sa).same_as(b)

    def test_bad_override(self):
        with pytest.raises(LangError):
            build_explicit(load_model(MODELS / "dice.tsg"), {"N": "lots"})

    def test_unknown_override(self):
        with pytest.raises(LangError):
            build_explicit(load_model(MODELS / "dice.tsg"), {"Q": "3"})


@pytest.mark.parametrize("n,states", [(10, 5755)])
def test_dice_state_count(n, states):
    ast = load_model(MODELS / "dice.tsg")
    assert build_explicit(ast, {"N": n}).num_states == states
    assert build_symbolic(ast, {"N": n}).num_states == states
