"""Normal, sequence and behavioral strategies; conversions and realization.

Unreached information sets get the uniform distribution whenever a
behavioral strategy has to be produced; any completion there is realization
equivalent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .forms import NormalForm, SequenceForm
from .game_tree import GameTree


@dataclass(frozen=True, eq=False)
class NormalStrategy:
    form: NormalForm
    agent: int
    probs: np.ndarray

    @property
    def plans(self):
        return self.form.plans[self.agent]


@dataclass(frozen=True, eq=False)
class SequenceStrategy:
    form: SequenceForm
    agent: int
    probs: np.ndarray

    @property
    def sequences(self):
        return self.form[self.agent]


@dataclass(frozen=True, eq=False)
class BehavioralStrategy:
    game: GameTree
    agent: int
    probs: Mapping[str, np.ndarray]  # infoset -> distribution over its actions

    def prob(self, h: str, action: str) -> float:
        return float(self.probs[h][self.game.infoset_actions(h).index(action)])


Strategy = Union[NormalStrategy, SequenceStrategy, BehavioralStrategy]


def uniform_behavioral(g: GameTree, agent: int) -> BehavioralStrategy:
    return BehavioralStrategy(
        g, agent, {h: np.full(len(g.infoset_actions(h)), 1.0 / len(g.infoset_actions(h))) for h in g.agent_infosets(agent)}
    )


def random_behavioral(g: GameTree, agent: int, rng: np.random.Generator, zero_prob: float = 0.0) -> BehavioralStrategy:
    """Dirichlet(1) draws per infoset; with ``zero_prob`` an action is knocked out
    (at least one action always keeps positive mass)."""
    probs = {}
    for h in g.agent_infosets(agent):
        n = len(g.infoset_actions(h))
        p = rng.dirichlet(np.ones(n))
        if zero_prob > 0:
            mask = rng.random(n) < zero_prob
            if mask.all():
                mask[rng.integers(n)] = False
            p = np.where(mask, 0.0, p)
            p /= p.sum()
        probs[h] = p
    return BehavioralStrategy(g, agent, probs)


def behavioral_to_normal(sigma: BehavioralStrategy, nf: NormalForm) -> NormalStrategy:
    """pi(p) = product of sigma(a) over the actions p specifies."""
    M = nf.action_indices[sigma.agent]
    probs = np.ones(M.shape[0])
    for k, h in enumerate(nf.game.agent_infosets(sigma.agent)):
        col = M[:, k]
        assigned = col >= 0
        probs[assigned] *= np.asarray(sigma.probs[h], dtype=float)[col[assigned]]
    return NormalStrategy(nf, sigma.agent, probs)


def behavioral_to_sequence(sigma: BehavioralStrategy, sf: SequenceForm) -> SequenceStrategy:
    """x(q) = product of sigma(a) over the actions of q."""
    seqs = sf[sigma.agent]
    x = np.empty(len(seqs))
    for k, s in enumerate(seqs.sequences):
        if not s.actions:
            x[k] = 1.0
        else:
            h, a = s.actions[-1]
            x[k] = x[seqs.parent[k]] * sigma.prob(h, a)
    return SequenceStrategy(sf, sigma.agent, x)


def _plan_mass(pi: NormalStrategy, pairs) -> float:
    return float(sum(w for p, w in zip(pi.plans, pi.probs) if p.contains(pairs)))


def normal_to_behavioral(pi: NormalStrategy) -> BehavioralStrategy:
    """sigma(a) = mass of plans choosing a, conditioned on the plans reaching a's infoset."""
    g = pi.form.game
    out = {}
    for h in g.agent_infosets(pi.agent):
        history = g.own_history(g.infosets[h][0], pi.agent)
        actions = g.infoset_actions(h)
        num = np.array([_plan_mass(pi, history + ((h, a),)) for a in actions])
        total = num.sum()
        out[h] = num / total if total > 0 else np.full(len(actions), 1.0 / len(actions))
    return BehavioralStrategy(g, pi.agent, out)


def reduced_normal_to_sequence(pi: NormalStrategy, sf: SequenceForm) -> SequenceStrategy:
    """x(q) = total mass of the plans that play every action of q."""
    seqs = sf[pi.agent]
    x = np.array([_plan_mass(pi, s.actions) for s in seqs.sequences])
    return SequenceStrategy(sf, pi.agent, x)


def sequence_to_behavioral(x: SequenceStrategy) -> BehavioralStrategy:
    """sigma(a) = x(q|a) / x(q); uniform where x(q) = 0."""
    seqs = x.sequences
    v = np.asarray(x.probs, dtype=float)
    out = {}
    for h, par, kids in seqs.infosets:
        if v[par] > 0:
            out[h] = v[kids] / v[par]
        else:
            out[h] = np.full(len(kids), 1.0 / len(kids))
    return BehavioralStrategy(x.form.game, x.agent, out)


def agent_reach(s: Strategy) -> np.ndarray:
    """One agent's contribution to the reach probability of each terminal."""
    if isinstance(s, NormalStrategy):
        return np.asarray(s.probs, dtype=float) @ s.form.reach[s.agent]
    if isinstance(s, SequenceStrategy):
        idx = [pair[1 + s.agent] for pair in s.form.terminal_pairs]
        return np.asarray(s.probs, dtype=float)[idx]
    if isinstance(s, BehavioralStrategy):
        g = s.game
        return np.array([np.prod([s.prob(h, a) for h, a in g.own_history(t, s.agent)]) for t in g.terminals])
    raise TypeError(f"not a strategy: {type(s).__name__}")


def realization_array(s1: Strategy, s2: Strategy) -> np.ndarray:
    return agent_reach(s1) * agent_reach(s2)


def realization_probabilities(g: GameTree, s1: Strategy, s2: Strategy) -> dict[str, float]:
    """Terminal node -> probability of reaching it under the profile (s1, s2)."""
    return dict(zip(g.terminals, realization_array(s1, s2).tolist()))


def is_realization_equivalent(g: GameTree, profile_a, profile_b, tol: float = 1e-9) -> tuple[bool, float]:
    """Compare two profiles (in any representations) by terminal reach probabilities."""
    gap = float(np.max(np.abs(realization_array(*profile_a) - realization_array(*profile_b))))
    return gap <= tol, gap
