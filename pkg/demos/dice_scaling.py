"""Build the dice game at growing N and compare BDD size against state count.

Run with ``python3 demos/dice_scaling.py``.
"""
import time
from importlib import resources
from pathlib import Path

from symtsg.checker import check
from symtsg.lang import build_symbolic, load_model
from symtsg.logic import Context, parse_property

MODELS = Path(str(resources.files("symtsg") / "models"))
ast = load_model(MODELS / "dice.tsg")

print(f"{'N':>3} {'states':>8} {'nodes':>7} {'build s':>8} {'check s':>8}  value")
for n in (2, 4, 6, 8, 10):
    t0 = time.perf_counter()
    sym = build_symbolic(ast, {"N": n})
    t1 = time.perf_counter()
    f = parse_property('<<p1>> R{"moves"}min=? [ F "done" ]', Context.of(sym))
    r = check(f, sym)
    t2 = time.perf_counter()
    nodes = sym.manager.node_count(sym.trans)
    print(f"{n:>3} {sym.num_states:>8} {nodes:>7} {t1 - t0:>8.2f} {t2 - t1:>8.2f}  {r.init_value:.6f}")
