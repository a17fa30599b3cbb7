"""Oracles and generators shared by the test modules."""

import numpy as np

from seqdyn.strategies import behavioral_to_normal


def plan_mass_sides(nf, sigma, actions):
    """Both sides of the plan-mass identity for a set of (infoset, action) pairs.

    Left: total normal-form mass of the plans containing every action.
    Right: product of behavioral probabilities over the union of the
    sequences ending in those actions.
    """
    g = nf.game
    pi = behavioral_to_normal(sigma, nf).probs
    lhs = sum(w for p, w in zip(nf.plans[sigma.agent], pi) if p.contains(actions))
    union = set()
    for h, a in actions:
        union.update(g.own_history(g.infosets[h][0], sigma.agent))
        union.add((h, a))
    rhs = float(np.prod([sigma.prob(h, a) for h, a in union]))
    return float(lhs), rhs


def consistent_actions(nf, agent, rng, max_size=3):
    """Up to ``max_size`` actions drawn from one randomly chosen plan."""
    plan = nf.plans[agent][rng.integers(len(nf.plans[agent]))]
    assigned = [(h, a) for h, a in zip(plan.infosets, plan.actions) if a is not None]
    if not assigned:  # an agent without decisions: the empty set, both sides are 1
        return ()
    k = int(rng.integers(1, min(max_size, len(assigned)) + 1))
    picks = rng.choice(len(assigned), size=k, replace=False)
    return tuple(assigned[i] for i in sorted(picks))
