"""Normal, reduced-normal and sequence-form representations of a game tree."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .game_tree import PLAN_CAP, Decision, GameTree, PlanCapError, Terminal, Violation
from .numerics import SparseBilinear

# entry kinds of a g-vector, see AgentSequences.g_rules
G_ZERO, G_ONE, G_RATIO = 0, 1, 2


@dataclass(frozen=True)
class Plan:
    """One action per information set; ``None`` marks a don't-care infoset."""

    agent: int
    infosets: tuple[str, ...]
    actions: tuple[str | None, ...]

    @property
    def label(self) -> str:
        tail = "*" if any(a is None for a in self.actions) else ""
        return "".join(a for a in self.actions if a is not None) + tail

    def action_at(self, h: str) -> str | None:
        return self.actions[self.infosets.index(h)]

    def contains(self, pairs) -> bool:
        """True when the plan picks every (infoset, action) pair in ``pairs``."""
        chosen = dict(zip(self.infosets, self.actions))
        return all(chosen.get(h) == a for h, a in pairs)

    def __str__(self) -> str:
        return self.label


class Sequence(NamedTuple):
    agent: int
    actions: tuple[tuple[str, str], ...]  # (infoset, action) pairs from the root

    @property
    def label(self) -> str:
        return "".join(a for _, a in self.actions)

    def __str__(self) -> str:
        return self.label or "q0"


def enumerate_plans(g: GameTree, agent: int, cap: int = PLAN_CAP) -> list[Plan]:
    """All full plans of ``agent``, lexicographic by infoset index then action index."""
    infosets = g.agent_infosets(agent)
    choices = [g.infoset_actions(h) for h in infosets]
    n = math.prod(len(c) for c in choices)
    if n > cap:
        raise PlanCapError(f"agent {agent + 1} has {n} plans (cap {cap})")
    return [Plan(agent, tuple(infosets), combo) for combo in itertools.product(*choices)]


def reduced_plans(g: GameTree, agent: int, cap: int = PLAN_CAP) -> list[Plan]:
    """Reduced plans built directly from the tree.

    A reduced plan only fixes the infosets its own earlier choices leave
    reachable. The order matches :func:`reduce_normal_form`: first occurrence
    in the lexicographic order of full plans.
    """
    infosets = g.agent_infosets(agent)

    def merge(a: dict, b: dict):
        for h, act in b.items():
            if a.get(h, act) != act:
                return None
        return {**a, **b}

    def walk(nid) -> list[dict]:
        node = g.nodes[nid]
        if isinstance(node, Terminal):
            return [{}]
        if node.player == agent:
            out = []
            for act, child in zip(node.actions, node.children):
                for sub in walk(child):
                    m = merge({node.infoset: act}, sub)
                    if m is not None:
                        out.append(m)
            return out
        partial = [{}]
        for child in node.children:
            partial = [m for a in partial for b in walk(child) if (m := merge(a, b)) is not None]
            if len(partial) > cap:
                raise PlanCapError(f"agent {agent + 1} has more than {cap} reduced plans")
        return partial

    assignments = walk(g.root)
    if len(assignments) > cap:
        raise PlanCapError(f"agent {agent + 1} has {len(assignments)} reduced plans (cap {cap})")
    unique = {tuple(sorted(a.items())): a for a in assignments}
    plans = [Plan(agent, tuple(infosets), tuple(a.get(h) for h in infosets)) for a in unique.values()]

    def key(p: Plan):
        return tuple(0 if a is None else g.infoset_actions(h).index(a) for h, a in zip(p.infosets, p.actions))

    return sorted(plans, key=key)


def _reach_matrix(g: GameTree, plans: list[Plan], agent: int) -> np.ndarray:
    """R[p, t] = 1 when plan p is consistent with the agent's moves towards terminal t."""
    R = np.zeros((len(plans), len(g.terminals)))
    hists = [g.own_history(t, agent) for t in g.terminals]
    for i, p in enumerate(plans):
        chosen = dict(zip(p.infosets, p.actions))
        for j, hist in enumerate(hists):
            if all(chosen.get(h) == a for h, a in hist):
                R[i, j] = 1.0
    return R


@dataclass(frozen=True, eq=False)
class NormalForm:
    game: GameTree
    plans: tuple[list[Plan], list[Plan]]
    payoffs: tuple[np.ndarray, np.ndarray]  # U_1, U_2, both |P_1| x |P_2|
    reach: tuple[np.ndarray, np.ndarray]  # plan-terminal consistency, |P_i| x |T|
    reduced: bool

    def labels(self, agent: int) -> list[str]:
        return [p.label for p in self.plans[agent]]

    @cached_property
    def action_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Per agent, plan x infoset matrix of chosen action indices (-1 where unassigned).

        Columns follow ``game.agent_infosets(agent)``.
        """
        out = []
        for agent in (0, 1):
            hs = self.game.agent_infosets(agent)
            M = np.full((len(self.plans[agent]), len(hs)), -1, dtype=np.intp)
            for i, p in enumerate(self.plans[agent]):
                chosen = dict(zip(p.infosets, p.actions))
                for k, h in enumerate(hs):
                    if chosen.get(h) is not None:
                        M[i, k] = self.game.infoset_actions(h).index(chosen[h])
            out.append(M)
        return tuple(out)

    def realization(self, pi1, pi2) -> np.ndarray:
        """Terminal reach probabilities (aligned with ``game.terminals``)."""
        return (np.asarray(pi1) @ self.reach[0]) * (np.asarray(pi2) @ self.reach[1])

    def shifted(self, c: float) -> "NormalForm":
        return NormalForm(self.game.shift_payoffs(c), self.plans, (self.payoffs[0] + c, self.payoffs[1] + c), self.reach, self.reduced)


def normal_form(g: GameTree, plans1: list[Plan], plans2: list[Plan], reduced: bool = False) -> NormalForm:
    R1 = _reach_matrix(g, plans1, 0)
    R2 = _reach_matrix(g, plans2, 1)
    joint = R1 @ R2.T
    if not np.all(joint == 1.0):
        raise ValueError("some plan pair does not reach exactly one terminal")
    u = np.array([g.nodes[t].payoffs for t in g.terminals])
    U1 = (R1 * u[:, 0]) @ R2.T
    U2 = (R1 * u[:, 1]) @ R2.T
    return NormalForm(g, (plans1, plans2), (U1, U2), (R1, R2), reduced)


def build_normal_form(g: GameTree, reduced: bool = True, cap: int = PLAN_CAP) -> NormalForm:
    if reduced:
        return normal_form(g, reduced_plans(g, 0, cap), reduced_plans(g, 1, cap), reduced=True)
    return normal_form(g, enumerate_plans(g, 0, cap), enumerate_plans(g, 1, cap))


def _relevant(g: GameTree, plan: Plan) -> Plan:
    """Blank out the infosets the plan's own choices make unreachable."""
    chosen = dict(zip(plan.infosets, plan.actions))
    reached = set()
    stack = [g.root]
    while stack:
        node = g.nodes[stack.pop()]
        if isinstance(node, Terminal):
            continue
        if node.player == plan.agent:
            reached.add(node.infoset)
            stack.append(node.children[node.actions.index(chosen[node.infoset])])
        else:
            stack.extend(node.children)
    return Plan(plan.agent, plan.infosets, tuple(a if h in reached else None for h, a in zip(plan.infosets, plan.actions)))


def reduce_normal_form(g: GameTree, plans: tuple[list[Plan], list[Plan]]) -> NormalForm:
    """Merge plans whose outcome against every opponent plan is identical."""
    R1 = _reach_matrix(g, plans[0], 0)
    R2 = _reach_matrix(g, plans[1], 1)
    outcome = (R1 * np.arange(1, R1.shape[1] + 1)) @ R2.T  # terminal index + 1 per plan pair
    kept = []
    for agent, rows in ((0, outcome), (1, outcome.T)):
        seen = {}
        for i, row in enumerate(rows):
            seen.setdefault(row.tobytes(), i)
        kept.append([_relevant(g, plans[agent][i]) for i in sorted(seen.values())])
    return normal_form(g, kept[0], kept[1], reduced=True)


class AgentSequences:
    """The sequences of one agent, their extension structure and constraints."""

    def __init__(self, agent: int, sequences: list[Sequence], parent: list[int],
                 last_infoset: list[str | None], infosets: list[tuple[str, int, list[int]]]):
        self.agent = agent
        self.sequences = sequences
        self.parent = np.array(parent, dtype=np.intp)
        self.last_infoset = last_infoset
        # (infoset id, parent sequence index, extending sequence indices) in discovery order
        self.infosets = infosets
        self.index = {s.actions: k for k, s in enumerate(sequences)}

    def __len__(self) -> int:
        return len(self.sequences)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.sequences]

    @cached_property
    def label_index(self) -> dict[str, int]:
        out = {}
        for k, lab in enumerate(self.labels):
            if lab in out:
                raise ValueError(f"agent {self.agent + 1}: sequence label {lab!r} is ambiguous")
            out[lab] = k
        return out

    @cached_property
    def prefixes(self) -> list[list[int]]:
        """Index chain from the empty sequence down to each sequence."""
        out = []
        for k in range(len(self)):
            chain = []
            j = k
            while j >= 0:
                chain.append(j)
                j = int(self.parent[j])
            out.append(chain[::-1])
        return out

    @cached_property
    def constraints(self) -> tuple[np.ndarray, np.ndarray]:
        """(E, e) with E x = e encoding x(q0) = 1 and flow conservation per infoset."""
        E = np.zeros((1 + len(self.infosets), len(self)))
        e = np.zeros(1 + len(self.infosets))
        E[0, 0] = 1.0
        e[0] = 1.0
        for r, (_, par, kids) in enumerate(self.infosets, start=1):
            E[r, par] = -1.0
            E[r, kids] = 1.0
        return E, e

    @cached_property
    def g_rules(self) -> tuple[np.ndarray, np.ndarray]:
        """Entry kinds and ratio denominators of every g-vector.

        ``kind[q, s]`` is G_ONE when s is a prefix of q, G_RATIO when s
        leaves q's path after their longest common prefix q' at an infoset q
        does not cross (value x(s)/x(q'), with ``den[q, s]`` = q'), G_ZERO
        otherwise.
        """
        n = len(self)
        kind = np.zeros((n, n), dtype=np.int8)
        den = np.zeros((n, n), dtype=np.intp)
        pre = self.prefixes
        for q in range(n):
            pq = pre[q]
            on_path = set(pq)
            for s in range(n):
                if s in on_path:
                    kind[q, s] = G_ONE
                    continue
                ps = pre[s]
                m = 0
                while m < len(pq) and m < len(ps) and pq[m] == ps[m]:
                    m += 1
                h = self.last_infoset[ps[m]]
                if m < len(pq) and self.last_infoset[pq[m]] == h:
                    continue  # q picks a different action at h
                kind[q, s] = G_RATIO
                den[q, s] = pq[m - 1]
        return kind, den


@dataclass(frozen=True, eq=False)
class SequenceForm:
    game: GameTree
    agents: tuple[AgentSequences, AgentSequences]
    payoffs: tuple[SparseBilinear, SparseBilinear]  # rows: agent-1 sequences, cols: agent-2
    terminal_pairs: list[tuple[str, int, int]]  # (terminal, q1, q2), in game.terminals order

    def __getitem__(self, agent: int) -> AgentSequences:
        return self.agents[agent]

    def shifted(self, c: float) -> "SequenceForm":
        return build_sequence_form(self.game.shift_payoffs(c))

    def payoff_vector(self, agent: int, x_other) -> np.ndarray:
        """U_i x_{-i}: the payoff each own sequence collects against the opponent."""
        if agent == 0:
            return self.payoffs[0].matvec(x_other)
        return self.payoffs[1].rmatvec(x_other)


def build_sequence_form(g: GameTree) -> SequenceForm:
    seqs = [[Sequence(0, ())], [Sequence(1, ())]]
    parent = [[-1], [-1]]
    last = [[None], [None]]
    infos = [[], []]
    index = [{(): 0}, {(): 0}]
    pairs = []

    stack = [(g.root, 0, 0)]
    while stack:
        nid, s1, s2 = stack.pop()
        node = g.nodes[nid]
        if isinstance(node, Terminal):
            pairs.append((nid, s1, s2))
            continue
        i = node.player
        cur = s1 if i == 0 else s2
        base = seqs[i][cur].actions
        kids = []
        for act in node.actions:
            key = base + ((node.infoset, act),)
            if key not in index[i]:
                index[i][key] = len(seqs[i])
                seqs[i].append(Sequence(i, key))
                parent[i].append(cur)
                last[i].append(node.infoset)
            kids.append(index[i][key])
        if node.infoset not in {h for h, _, _ in infos[i]}:
            infos[i].append((node.infoset, cur, kids))
        for child, k in reversed(list(zip(node.children, kids))):
            stack.append((child, k, s2) if i == 0 else (child, s1, k))

    assert [t for t, _, _ in pairs] == g.terminals
    agents = tuple(AgentSequences(i, seqs[i], parent[i], last[i], infos[i]) for i in (0, 1))
    shape = (len(agents[0]), len(agents[1]))
    U = tuple(
        SparseBilinear([(a, b, g.nodes[t].payoffs[k]) for t, a, b in pairs], shape) for k in (0, 1)
    )
    return SequenceForm(g, agents, U, pairs)


def constraint_residual(sf: SequenceForm, agent: int, x) -> float:
    E, e = sf[agent].constraints
    return float(np.max(np.abs(E @ np.asarray(x, dtype=float) - e)))


def check_sequence_constraints(sf: SequenceForm, agent: int, x, tol: float = 1e-9) -> list[Violation]:
    """Violations of x(q0) = 1, flow conservation and nonnegativity beyond ``tol``."""
    seqs = sf[agent]
    x = np.asarray(x, dtype=float)
    if x.shape != (len(seqs),):
        return [Violation("shape", f"expected {len(seqs)} entries, got {x.shape}")]
    out = []
    if abs(x[0] - 1.0) > tol:
        out.append(Violation("root", f"x(q0) = {float(x[0])!r} != 1", ("q0",)))
    for h, par, kids in seqs.infosets:
        gap = x[kids].sum() - x[par]
        if abs(gap) > tol:
            out.append(Violation("flow", f"infoset {h}: children sum differs from parent by {gap:.3g}",
                                 (str(seqs.sequences[par]), *(str(seqs.sequences[k]) for k in kids))))
    for k in np.flatnonzero(x < -tol):
        out.append(Violation("negative", f"x = {float(x[k])!r}", (str(seqs.sequences[k]),)))
    return out
