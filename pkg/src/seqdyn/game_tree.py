"""Two-player extensive-form games with imperfect information and perfect recall."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Union

import numpy as np

#: Default ceiling on the number of plans any helper is allowed to enumerate.
PLAN_CAP = 1_000_000


class PlanCapError(ValueError):
    """Raised when a game would need more plans than the configured cap."""


@dataclass(frozen=True)
class Decision:
    player: int  # 0 or 1
    infoset: str
    actions: tuple[str, ...]
    children: tuple[str, ...]


@dataclass(frozen=True)
class Terminal:
    payoffs: tuple[float, ...]


Node = Union[Decision, Terminal]


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    where: tuple[str, ...] = ()

    def __str__(self) -> str:
        loc = f" [{', '.join(self.where)}]" if self.where else ""
        return f"{self.kind}: {self.detail}{loc}"


@dataclass(frozen=True)
class GameTree:
    """An extensive-form game.

    Structural attributes (preorder, infosets, own-action histories) are
    computed lazily and assume the tree already passed :func:`validate_game`.
    """

    players: tuple[str, ...]
    root: str
    nodes: Mapping[str, Node] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "nodes", dict(self.nodes))

    @cached_property
    def preorder(self) -> list[str]:
        order = []
        stack = [self.root]
        while stack:
            nid = stack.pop()
            order.append(nid)
            node = self.nodes[nid]
            if isinstance(node, Decision):
                stack.extend(reversed(node.children))
        return order

    @cached_property
    def parent(self) -> dict[str, tuple[str, int]]:
        """child id -> (parent id, action index)."""
        out = {}
        for nid in self.preorder:
            node = self.nodes[nid]
            if isinstance(node, Decision):
                for k, child in enumerate(node.children):
                    out[child] = (nid, k)
        return out

    @cached_property
    def terminals(self) -> list[str]:
        return [n for n in self.preorder if isinstance(self.nodes[n], Terminal)]

    @cached_property
    def infosets(self) -> dict[str, list[str]]:
        """infoset id -> member nodes, both in order of first preorder visit."""
        out: dict[str, list[str]] = {}
        for nid in self.preorder:
            node = self.nodes[nid]
            if isinstance(node, Decision):
                out.setdefault(node.infoset, []).append(nid)
        return out

    @cached_property
    def infoset_index(self) -> dict[str, int]:
        return {h: k for k, h in enumerate(self.infosets)}

    def infoset_player(self, h: str) -> int:
        return self.nodes[self.infosets[h][0]].player

    def infoset_actions(self, h: str) -> tuple[str, ...]:
        return self.nodes[self.infosets[h][0]].actions

    def agent_infosets(self, agent: int) -> list[str]:
        return [h for h in self.infosets if self.infoset_player(h) == agent]

    def path(self, nid: str) -> list[tuple[str, int]]:
        """(node, action index) pairs from the root down to ``nid``."""
        steps = []
        while nid != self.root:
            par, k = self.parent[nid]
            steps.append((par, k))
            nid = par
        steps.reverse()
        return steps

    def own_history(self, nid: str, agent: int) -> tuple[tuple[str, str], ...]:
        """The (infoset, action) pairs ``agent`` played on the way to ``nid``."""
        hist = []
        for par, k in self.path(nid):
            node = self.nodes[par]
            if node.player == agent:
                hist.append((node.infoset, node.actions[k]))
        return tuple(hist)

    def shift_payoffs(self, c: float) -> "GameTree":
        """Copy of the game with ``c`` added to every payoff of every agent."""
        nodes = {
            nid: Terminal(tuple(u + c for u in node.payoffs)) if isinstance(node, Terminal) else node
            for nid, node in self.nodes.items()
        }
        return GameTree(self.players, self.root, nodes)

    @property
    def size(self) -> int:
        return len(self.nodes)


def validate_game(g: GameTree) -> list[Violation]:
    """Every violated structural invariant of ``g``; empty iff the game is valid."""
    out: list[Violation] = []
    if len(g.players) != 2:
        out.append(Violation("agents", f"expected exactly two agents, got {len(g.players)}"))
    if g.root not in g.nodes:
        out.append(Violation("root", f"root {g.root!r} is not a node", (g.root,)))
        return out
    if isinstance(g.nodes[g.root], Terminal):
        out.append(Violation("no decision nodes", "the root is terminal", (g.root,)))

    # tree shape: walk from the root, reject dangling refs, shared children and cycles
    parents: dict[str, list[str]] = {}
    for nid, node in g.nodes.items():
        if isinstance(node, Decision):
            for child in node.children:
                if child not in g.nodes:
                    out.append(Violation("dangling child", f"{nid} points to unknown node {child!r}", (nid,)))
                    continue
                parents.setdefault(child, []).append(nid)
    if g.root in parents:
        out.append(Violation("cycle", "the root has a parent", (g.root, *parents[g.root])))
    for child, ps in parents.items():
        if len(ps) > 1:
            out.append(Violation("multiple parents", f"{child} has {len(ps)} parents", (child, *ps)))
    seen = set()
    stack = [g.root]
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        node = g.nodes[nid]
        if isinstance(node, Decision):
            stack.extend(c for c in node.children if c in g.nodes)
    unreachable = sorted(set(g.nodes) - seen)
    if unreachable:
        out.append(Violation("unreachable", f"{len(unreachable)} node(s) not reachable from the root", tuple(unreachable)))
    if out and any(v.kind in ("cycle", "multiple parents", "dangling child") for v in out):
        return out  # later checks walk paths and need a proper tree

    for nid, node in g.nodes.items():
        if isinstance(node, Terminal):
            if len(node.payoffs) != 2:
                out.append(Violation("payoffs", f"terminal has {len(node.payoffs)} payoffs, expected 2", (nid,)))
            elif not all(math.isfinite(u) for u in node.payoffs):
                out.append(Violation("payoffs", "non-finite payoff", (nid,)))
            continue
        if node.player not in (0, 1):
            out.append(Violation("owner", f"player index {node.player} is not 0 or 1", (nid,)))
        if not node.actions:
            out.append(Violation("actions", "decision node without actions", (nid,)))
        if len(node.actions) != len(node.children):
            out.append(Violation("actions", "action and child lists differ in length", (nid,)))
        if len(set(node.actions)) != len(node.actions):
            out.append(Violation("actions", "repeated action label", (nid,)))

    members: dict[str, list[str]] = {}
    for nid in g.preorder if not unreachable else sorted(seen):
        node = g.nodes[nid]
        if isinstance(node, Decision):
            members.setdefault(node.infoset, []).append(nid)
    for h, nids in members.items():
        first = g.nodes[nids[0]]
        if any(g.nodes[n].player != first.player for n in nids):
            out.append(Violation("infoset owner", f"infoset {h} mixes agents", tuple(nids)))
            continue
        if any(g.nodes[n].actions != first.actions for n in nids):
            out.append(Violation("infoset actions", f"infoset {h} has differing action lists", tuple(nids)))
        if not unreachable and len(nids) > 1:
            hists = {n: g.own_history(n, first.player) for n in nids}
            if len(set(hists.values())) > 1:
                out.append(Violation("perfect recall", f"infoset {h} is reached by different own-action histories", tuple(nids)))
    return out


def build_example_fig1() -> GameTree:
    """The running example: agent 1 picks L1/R1; after R1 agent 2 picks l/r; agent 1 moves again."""
    nodes = {
        "1.1": Decision(0, "1.1", ("L1", "R1"), ("t1", "2.1")),
        "2.1": Decision(1, "2.1", ("l", "r"), ("1.2", "1.3")),
        "1.2": Decision(0, "1.2", ("L2", "R2"), ("t2", "t3")),
        "1.3": Decision(0, "1.3", ("L3", "R3"), ("t4", "t5")),
        "t1": Terminal((2.0, 4.0)),
        "t2": Terminal((3.0, 1.0)),
        "t3": Terminal((3.0, 3.0)),
        "t4": Terminal((2.0, 1.0)),
        "t5": Terminal((4.0, 2.0)),
    }
    return GameTree(("1", "2"), "1.1", nodes)


def count_reduced_plans(g: GameTree, agent: int) -> int:
    """Reduced plan count, exact for perfect-information games, an upper bound otherwise."""

    def count(nid):
        node = g.nodes[nid]
        if isinstance(node, Terminal):
            return 1
        sub = [count(c) for c in node.children]
        return sum(sub) if node.player == agent else math.prod(sub)

    return count(g.root)


def random_game(
    depth: int,
    branching: int,
    merge: float = 0.0,
    payoff_range: tuple[float, float] = (1.0, 10.0),
    seed: int | None = None,
    *,
    integer_payoffs: bool = False,
    plan_cap: int = PLAN_CAP,
) -> GameTree:
    """Complete tree of ``depth`` decision levels, owners alternating from agent 1.

    With probability ``merge`` a node joins the previous information set among
    same-owner nodes at its level that share its own-action history, so every
    merge keeps perfect recall.
    """
    if depth < 1 or branching < 2:
        raise ValueError(f"need depth >= 1 and branching >= 2, got depth={depth}, branching={branching}")
    if not 0.0 <= merge <= 1.0:
        raise ValueError(f"merge probability must lie in [0, 1], got {merge}")
    rng = np.random.default_rng(seed)
    lo, hi = payoff_range

    level = [("n0", ())]  # (node id, full action history as (player, action index))
    counter = 1
    raw = {}
    for d in range(depth):
        player = d % 2
        nxt = []
        for nid, hist in level:
            kids = []
            for k in range(branching):
                cid = f"n{counter}"
                counter += 1
                kids.append(cid)
                nxt.append((cid, hist + ((nid, player, k),)))
            raw[nid] = (player, tuple(kids), hist)
        level = nxt

    # assign infosets level by level
    infoset_of = {}
    n_infosets = 0
    by_level: dict[int, list[str]] = {}
    for nid, (player, _, hist) in raw.items():
        by_level.setdefault(len(hist), []).append(nid)
    for d in sorted(by_level):
        groups: dict[tuple, list[str]] = {}
        for nid in by_level[d]:
            player, _, hist = raw[nid]
            own = tuple((infoset_of[p], k) for p, pl, k in hist if pl == player)
            groups.setdefault(own, []).append(nid)
        for own in groups:
            prev = None
            for nid in groups[own]:
                if prev is not None and merge > 0 and rng.random() < merge:
                    infoset_of[nid] = prev
                else:
                    prev = f"h{n_infosets}"
                    n_infosets += 1
                    infoset_of[nid] = prev

    nodes: dict[str, Node] = {}
    letters = "abcdefghijklmnopqrstuvwxyz"
    for nid, (player, kids, _) in raw.items():
        h = infoset_of[nid]
        labels = tuple(f"{letters[k]}{h[1:]}" for k in range(branching))
        nodes[nid] = Decision(player, h, labels, kids)
    for nid, _ in level:
        if integer_payoffs:
            u = rng.integers(int(lo), int(hi) + 1, size=2).astype(float)
        else:
            u = rng.uniform(lo, hi, size=2)
        nodes[nid] = Terminal((float(u[0]), float(u[1])))

    g = GameTree(("1", "2"), "n0", nodes)
    for agent in (0, 1):
        n = count_reduced_plans(g, agent)
        if n > plan_cap:
            raise PlanCapError(f"agent {agent + 1} would have up to {n} reduced plans (cap {plan_cap})")
    return g


def comb_game(depth: int, branching: int = 2, payoff_range=(1.0, 10.0), seed: int | None = 0) -> GameTree:
    """Perfect-information benchmark family with linear size and exponentially many plans.

    Level ``k`` (1-based) has an agent-1 hub ``A{k}`` whose first action
    continues to an agent-2 hub ``B{k}``; the other ``branching - 1`` hub
    actions end in a one-shot cell of the opponent (``branching`` terminal
    actions).  ``B{k}`` mirrors this, its first action continuing to
    ``A{k+1}`` (a terminal after the last level).

    For ``branching = 2`` each agent has ``4 * depth + 1`` sequences while the
    reduced plan counts are ``2**(depth + 1) - 1`` for agent 1 and
    ``3 * 2**depth - 2`` for agent 2.
    """
    if depth < 1 or branching < 2:
        raise ValueError(f"need depth >= 1 and branching >= 2, got depth={depth}, branching={branching}")
    rng = np.random.default_rng(seed)
    lo, hi = payoff_range
    nodes: dict[str, Node] = {}
    tcount = 0

    def terminal():
        nonlocal tcount
        tid = f"t{tcount}"
        tcount += 1
        u = rng.uniform(lo, hi, size=2)
        nodes[tid] = Terminal((float(u[0]), float(u[1])))
        return tid

    def cell(name, player):
        acts = tuple(f"{name.lower()}{j}" for j in range(branching))
        nodes[name] = Decision(player, name, acts, tuple(terminal() for _ in acts))
        return name

    for k in range(1, depth + 1):
        nxt = f"A{k + 1}" if k < depth else terminal()
        b_kids = [nxt] + [cell(f"D{k}x{j}", 0) for j in range(1, branching)]
        nodes[f"B{k}"] = Decision(1, f"B{k}", tuple(f"b{k}x{j}" for j in range(branching)), tuple(b_kids))
        a_kids = [f"B{k}"] + [cell(f"C{k}x{j}", 1) for j in range(1, branching)]
        nodes[f"A{k}"] = Decision(0, f"A{k}", tuple(f"a{k}x{j}" for j in range(branching)), tuple(a_kids))
    return GameTree(("1", "2"), "A1", nodes)
