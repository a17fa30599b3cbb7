"""Sequence-form and normal-form dynamics compared through the play they induce."""

import numpy as np

from seqdyn import (
    ReplicatorConfig,
    behavioral_to_normal,
    behavioral_to_sequence,
    build_normal_form,
    build_sequence_form,
    discrete_step_normal,
    discrete_step_sequence,
    integrate_trajectory,
    random_game,
    sequence_to_behavioral,
)
from seqdyn.strategies import SequenceStrategy, random_behavioral


def reach(sf, x1, x2):
    return np.array([x1[a] * x2[b] for _, a, b in sf.terminal_pairs])


g = random_game(3, 2, merge=0.5, seed=4002)
sf, nf = build_sequence_form(g), build_normal_form(g)
rng = np.random.default_rng(0)
sigma = [random_behavioral(g, i, rng) for i in (0, 1)]
x = [behavioral_to_sequence(s, sf).probs for s in sigma]
pi = [behavioral_to_normal(s, nf).probs for s in sigma]

# %% continuous time: both flows induce the same play along the whole path
common = dict(mode="continuous", steps=500, dt=1e-2, renormalize=False)
seq = integrate_trajectory(sf, x, ReplicatorConfig(**common))
nrm = integrate_trajectory(nf, pi, ReplicatorConfig(representation="normal", **common))
gap = max(np.abs(reach(sf, a.x1, a.x2) - nf.realization(b.x1, b.x2)).max() for a, b in zip(seq, nrm))
print(f"continuous: worst realization gap over {len(seq)} points {gap:.1e}")

# %% discrete time: a single step from a product-form mixture agrees ...
xs, ps = list(x), list(pi)
for step in range(1, 6):
    xs = discrete_step_sequence(sf, *xs)
    ps = discrete_step_normal(nf, *ps)
    print(f"independent step {step}: gap {np.abs(reach(sf, *xs) - nf.realization(*ps)).max():.1e}")

# %% ... but the normal-form step correlates choices across information sets,
# so repeated independent steps drift apart. Mapping the sequence state back to
# its product-form mixture before each step keeps the two in lockstep.
xs = list(x)
for step in range(1, 6):
    ps = [behavioral_to_normal(sequence_to_behavioral(SequenceStrategy(sf, i, xs[i])), nf).probs for i in (0, 1)]
    xs = discrete_step_sequence(sf, *xs)
    ps = discrete_step_normal(nf, *ps)
    print(f"resynchronized step {step}: gap {np.abs(reach(sf, *xs) - nf.realization(*ps)).max():.1e}")
