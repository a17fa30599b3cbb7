"""Discrete and continuous replicator dynamics on the sequence form."""

from pathlib import Path

import numpy as np

from seqdyn import (
    ReplicatorConfig,
    build_normal_form,
    build_sequence_form,
    check_sequence_constraints,
    discrete_step_sequence,
    g_matrix,
    integrate_trajectory,
    naive_discrete_step_sequence,
)
from seqdyn.io import load_game, load_json, sequence_profile

DATA = Path(__file__).parent / "data"
np.set_printoptions(precision=4, suppress=True)

g = load_game(DATA / "fig1.json")
sf, nf = build_sequence_form(g), build_normal_form(g)
x1, x2 = sequence_profile(load_json(DATA / "fig1_profile.json"), sf, nf)
print("x1 =", x1, " x2 =", x2)

# %% column q of G holds the mass x redistributes when sequence q is rewarded
print("G1 =\n", g_matrix(sf, 0, x1))

# %% one discrete step stays inside the polytope
y1, y2 = discrete_step_sequence(sf, x1, x2)
print("x1' =", y1, " violations:", check_sequence_constraints(sf, 0, y1))

# %% rewarding unit vectors instead of g vectors breaks the constraints
z1, z2 = naive_discrete_step_sequence(sf, x1, x2)
print("naive x1' =", z1)
for v in check_sequence_constraints(sf, 0, z1) + check_sequence_constraints(sf, 1, z2):
    print("  ", v)

# %% a continuous trajectory with RK4
traj = integrate_trajectory(sf, (x1, x2), ReplicatorConfig(mode="continuous", steps=2000, dt=1e-2))
for p in traj[::400]:
    print(f"t={p.t:5.1f}  x1={p.x1}  x2={p.x2}  u=({p.u1:.3f}, {p.u2:.3f})  residual={p.residual:.1e}")
