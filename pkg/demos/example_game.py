"""Walk through the three-state example game end to end.

Run with ``python3 demos/example_game.py``.
"""
from importlib import resources
from pathlib import Path

from symtsg.checker import SolverConfig, check
from symtsg.explicit import solve_explicit
from symtsg.lang import build_explicit, build_symbolic, load_model
from symtsg.logic import Context, parse_property

MODELS = Path(str(resources.files("symtsg") / "models"))

ast = load_model(MODELS / "example.tsg")
sym = build_symbolic(ast)  # transition MTBDD over player, action and state bits
game = build_explicit(ast)  # the same game as an explicit table
print(f"{sym.num_states} states, {sym.manager.node_count(sym.trans)} MTBDD nodes")

cfg = SolverConfig(epsilon=1e-10)
ctx = Context.of(game)
for text in [
    '<<p1>> Pmax=? [ F "goal" ]',
    '<<p2>> Pmax=? [ F "goal" ]',
    '<<p1>> R{"steps"}min=? [ F "goal" ]',
    '<<p1>> Pmax=? [ F<=2 "goal" ]',
    '<<p1:p2>>max=? ( P[ F "two" ] + P[ F "one" ] )',
]:
    f = parse_property(text, ctx)
    r = check(f, sym, cfg)
    e = solve_explicit(game, f, cfg)
    print(f"{text:50}  symbolic {r.init_value:<8.6g} explicit {e.init_value:.6g}")
    if r.strategy is not None:
        print("    strategy:", r.strategy.to_text().strip().replace("\n", "; "))
