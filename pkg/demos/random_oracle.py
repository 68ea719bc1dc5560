"""Cross-check both engines against profile enumeration on small random games.

Run with ``python3 demos/random_oracle.py [n_games]``.
"""
import random
import sys

import numpy as np

from symtsg.checker import SolverConfig, check
from symtsg.explicit import SparseGame, brute_force_values, objective_of, solve_explicit
from symtsg.generate import random_game, random_query
from symtsg.logic import pretty
from symtsg.model import encode

rng = random.Random(1)
cfg = SolverConfig(epsilon=1e-12)
worst = 0.0
for i in range(int(sys.argv[1]) if len(sys.argv) > 1 else 20):
    game = random_game(rng, rng.randint(2, 8))
    sym, sparse = encode(game), SparseGame(game)
    f = random_query(rng, game.players)
    sv = sym.to_vector(check(f, sym, cfg).values)
    ev = solve_explicit(sparse, f, cfg).values
    obj, maxp, negate = objective_of(sparse, f)
    bv = brute_force_values(sparse, obj, maxp)
    bv = 1 - bv if negate else bv
    gap = max(np.nanmax(np.abs(np.where(np.isinf(a) & np.isinf(b), 0, a - b))) for a, b in [(sv, ev), (sv, bv)])
    worst = max(worst, gap)
    print(f"{game.num_states:2} states  {pretty(f):45} gap {gap:.1e}")
print(f"worst gap {worst:.1e}")
