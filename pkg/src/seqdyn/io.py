"""File formats: game JSON, strategy/profile JSON, trajectory CSV, form dumps."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .forms import NormalForm, SequenceForm
from .game_tree import Decision, GameTree, Terminal, validate_game
from .strategies import (
    BehavioralStrategy,
    NormalStrategy,
    SequenceStrategy,
    behavioral_to_normal,
    behavioral_to_sequence,
    reduced_normal_to_sequence,
    sequence_to_behavioral,
)


class GameFormatError(ValueError):
    """Malformed game or strategy document."""


class InvalidGameError(ValueError):
    def __init__(self, violations):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _require(obj: dict, where: str, required: set[str], optional: set[str] = frozenset()):
    if not isinstance(obj, dict):
        raise GameFormatError(f"{where}: expected an object")
    missing = required - obj.keys()
    if missing:
        raise GameFormatError(f"{where}: missing field(s) {sorted(missing)}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise GameFormatError(f"{where}: unknown field(s) {sorted(unknown)}")


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise GameFormatError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def game_from_dict(doc: dict) -> GameTree:
    """Parse a game document strictly and validate the resulting tree."""
    _require(doc, "game", {"players", "root", "nodes"})
    players = doc["players"]
    if not isinstance(players, list) or not all(isinstance(p, str) for p in players):
        raise GameFormatError("game.players: expected a list of names")
    if not isinstance(doc["nodes"], dict):
        raise GameFormatError("game.nodes: expected an object")
    nodes = {}
    for nid, node in doc["nodes"].items():
        where = f"nodes.{nid}"
        if not isinstance(node, dict) or "type" not in node:
            raise GameFormatError(f"{where}: missing node type")
        kind = node["type"]
        if kind == "terminal":
            _require(node, where, {"type", "payoffs"})
            if not isinstance(node["payoffs"], list):
                raise GameFormatError(f"{where}.payoffs: expected a list")
            nodes[nid] = Terminal(tuple(_number(u, f"{where}.payoffs") for u in node["payoffs"]))
        elif kind == "decision":
            _require(node, where, {"type", "player", "infoset", "actions"})
            player = node["player"]
            if player in players:
                idx = players.index(player)
            elif isinstance(player, int) and not isinstance(player, bool) and 1 <= player <= len(players):
                idx = player - 1
            else:
                raise GameFormatError(f"{where}.player: unknown player {player!r}")
            if not isinstance(node["actions"], list):
                raise GameFormatError(f"{where}.actions: expected a list")
            labels, children = [], []
            for k, act in enumerate(node["actions"]):
                _require(act, f"{where}.actions[{k}]", {"label", "child"})
                labels.append(str(act["label"]))
                children.append(str(act["child"]))
            nodes[nid] = Decision(idx, str(node["infoset"]), tuple(labels), tuple(children))
        elif kind == "chance":
            raise GameFormatError(f"{where}: chance nodes are not supported")
        else:
            raise GameFormatError(f"{where}: unknown node type {kind!r}")
    g = GameTree(tuple(players), str(doc["root"]), nodes)
    violations = validate_game(g)
    if violations:
        raise InvalidGameError(violations)
    return g


def game_to_dict(g: GameTree) -> dict:
    nodes = {}
    for nid, node in g.nodes.items():
        if isinstance(node, Terminal):
            nodes[nid] = {"type": "terminal", "payoffs": list(node.payoffs)}
        else:
            nodes[nid] = {
                "type": "decision",
                "player": g.players[node.player],
                "infoset": node.infoset,
                "actions": [{"label": a, "child": c} for a, c in zip(node.actions, node.children)],
            }
    return {"players": list(g.players), "root": g.root, "nodes": nodes}


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{path}: invalid JSON ({exc})") from exc


def load_game(path) -> GameTree:
    return game_from_dict(load_json(path))


# -- strategies ---------------------------------------------------------------

PROFILE_KINDS = ("sequence", "normal", "behavioral")


def _agent_key(doc: dict, g: GameTree, agent: int):
    for key in (str(agent + 1), g.players[agent]):
        if key in doc:
            return doc[key]
    raise GameFormatError(f"profile: no strategy for agent {agent + 1}")


def _probs(entries, where) -> dict[str, float]:
    if not isinstance(entries, dict):
        raise GameFormatError(f"{where}: expected an object mapping label to probability")
    return {str(k): _number(v, f"{where}.{k}") for k, v in entries.items()}


def _vector(entries: dict[str, float], labels: list[str], where: str) -> np.ndarray:
    index = {lab: k for k, lab in enumerate(labels)}
    if len(index) != len(labels):
        raise GameFormatError(f"{where}: labels are ambiguous in this game")
    out = np.zeros(len(labels))
    for lab, p in entries.items():
        if lab not in index:
            raise GameFormatError(f"{where}: unknown label {lab!r}")
        out[index[lab]] = p
    return out


def parse_profile(doc: dict, g: GameTree, kind: str | None = None):
    """Read a two-agent profile ``{"kind": ..., "1": {label: p}, "2": {label: p}}``.

    Returns ``(kind, [entries_1, entries_2])`` with raw label maps; ``kind``
    comes from the document, falls back to the caller's, and finally to
    ``behavioral`` when every label looks like ``infoset:action``.
    """
    if not isinstance(doc, dict):
        raise GameFormatError("profile: expected an object")
    allowed = {"kind", "1", "2", *g.players}
    unknown = doc.keys() - allowed
    if unknown:
        raise GameFormatError(f"profile: unknown field(s) {sorted(unknown)}")
    doc_kind = doc.get("kind")
    if doc_kind is not None and doc_kind not in PROFILE_KINDS:
        raise GameFormatError(f"profile.kind: expected one of {PROFILE_KINDS}, got {doc_kind!r}")
    entries = [_probs(_agent_key(doc, g, i), f"profile.{i + 1}") for i in (0, 1)]
    if doc_kind is None:
        labels = [k for e in entries for k in e]
        doc_kind = "behavioral" if labels and all(":" in k for k in labels) else kind
    if doc_kind is None:
        raise GameFormatError("profile: cannot tell the strategy representation; add a \"kind\" field")
    return doc_kind, entries


def behavioral_from_entries(g: GameTree, agent: int, entries: dict[str, float]) -> BehavioralStrategy:
    probs = {h: np.zeros(len(g.infoset_actions(h))) for h in g.agent_infosets(agent)}
    for key, p in entries.items():
        h, _, a = key.partition(":")
        if h not in probs or a not in g.infoset_actions(h):
            raise GameFormatError(f"profile.{agent + 1}: unknown behavioral label {key!r}")
        probs[h][g.infoset_actions(h).index(a)] = p
    for h, p in probs.items():
        if abs(p.sum() - 1.0) > 1e-9:
            raise GameFormatError(f"profile.{agent + 1}: probabilities at infoset {h} sum to {p.sum():.6g}")
    return BehavioralStrategy(g, agent, probs)


def sequence_profile(doc: dict, sf: SequenceForm, nf: NormalForm | None = None):
    """Load any profile document as sequence-form vectors."""
    g = sf.game
    kind, entries = parse_profile(doc, g, "sequence")
    out = []
    for i in (0, 1):
        if kind == "sequence":
            out.append(_vector(entries[i], sf[i].labels, f"profile.{i + 1}"))
        elif kind == "behavioral":
            out.append(behavioral_to_sequence(behavioral_from_entries(g, i, entries[i]), sf).probs)
        else:
            if nf is None:
                raise GameFormatError("profile: a normal-form profile needs the normal form")
            pi = NormalStrategy(nf, i, _vector(entries[i], nf.labels(i), f"profile.{i + 1}"))
            out.append(reduced_normal_to_sequence(pi, sf).probs)
    return out


def normal_profile(doc: dict, nf: NormalForm, sf: SequenceForm):
    """Load any profile document as normal-form vectors over ``nf``'s plans."""
    g = nf.game
    kind, entries = parse_profile(doc, g, "normal")
    out = []
    for i in (0, 1):
        if kind == "normal":
            out.append(_vector(entries[i], nf.labels(i), f"profile.{i + 1}"))
            continue
        if kind == "behavioral":
            sigma = behavioral_from_entries(g, i, entries[i])
        else:
            x = SequenceStrategy(sf, i, _vector(entries[i], sf[i].labels, f"profile.{i + 1}"))
            sigma = sequence_to_behavioral(x)
        out.append(behavioral_to_normal(sigma, nf).probs)
    return out


def profile_to_dict(kind: str, labels: tuple[list[str], list[str]], vectors) -> dict:
    return {
        "kind": kind,
        **{str(i + 1): {lab: float(p) for lab, p in zip(labels[i], vectors[i])} for i in (0, 1)},
    }


# -- forms and trajectories ---------------------------------------------------

def normal_form_to_dict(nf: NormalForm) -> dict:
    return {
        "kind": "reduced" if nf.reduced else "normal",
        "players": list(nf.game.players),
        "plans": [nf.labels(0), nf.labels(1)],
        "payoffs": [nf.payoffs[0].tolist(), nf.payoffs[1].tolist()],
    }


def sequence_form_to_dict(sf: SequenceForm) -> dict:
    agents = []
    for i in (0, 1):
        seqs = sf[i]
        agents.append({
            "sequences": seqs.labels,
            "infosets": [
                {"infoset": h, "parent": seqs.labels[par], "extensions": [seqs.labels[k] for k in kids]}
                for h, par, kids in seqs.infosets
            ],
        })
    payoffs = [
        {"terminal": t, "q1": sf[0].labels[a], "q2": sf[1].labels[b], "u": list(sf.game.nodes[t].payoffs)}
        for t, a, b in sf.terminal_pairs
    ]
    return {"kind": "sequence", "players": list(sf.game.players), "agents": agents, "payoffs": payoffs}


def trajectory_csv(points: Iterable, labels: tuple[list[str], list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *(f"1:{lab}" for lab in labels[0]), *(f"2:{lab}" for lab in labels[1]), "u1", "u2", "residual"])
    fmt = lambda v: format(float(v), ".17g")  # noqa: E731
    for p in points:
        w.writerow([fmt(p.t), *map(fmt, p.x1), *map(fmt, p.x2), fmt(p.u1), fmt(p.u2), fmt(p.residual)])
    return buf.getvalue()
