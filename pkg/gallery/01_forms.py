"""Three representations of one game: full plans, reduced plans and sequences."""

from pathlib import Path

import numpy as np

from seqdyn import build_normal_form, build_sequence_form, comb_game
from seqdyn.io import load_game

DATA = Path(__file__).parent / "data"

# %% the running example: agent 1 has three information sets, agent 2 one
g = load_game(DATA / "fig1.json")
full = build_normal_form(g, reduced=False)
nf = build_normal_form(g)
sf = build_sequence_form(g)

for agent in (0, 1):
    print(f"agent {agent + 1}")
    print("  full plans   ", full.labels(agent))
    print("  reduced plans", nf.labels(agent))
    print("  sequences    ", sf[agent].labels)

# %% the sequence strategy polytope is E x = e, x >= 0
E, e = sf[0].constraints
print("E1 =\n", E.astype(int))
print("e1 =", e.astype(int))

# %% payoffs live on terminal (sequence, sequence) pairs, so the matrix is sparse
A = sf.payoffs[0].toarray()
print(f"agent 1 payoff matrix {A.shape}, {np.count_nonzero(A)} nonzero entries")

# %% sizes grow linearly in sequences but exponentially in plans
print("depth  sequences  reduced plans")
for d in range(1, 7):
    gd = comb_game(d)
    print(f"{d:5d}  {len(build_sequence_form(gd)[0]):9d}  {len(build_normal_form(gd).plans[0]):13d}")
