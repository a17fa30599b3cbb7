"""Linear stability of rest points of the continuous sequence-form replicator.

Where a prefix q' of the target sequence has zero probability, the ratio
entries of g_q are undefined; they are completed with a pure best response
below q' (computed bottom-up against the opponent), which is what the
dynamics would approach as x(q') -> 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .forms import G_ONE, G_RATIO, SequenceForm
from .numerics import eigenvalues, sort_spectrum

ONE, RATIO, BEST_RESPONSE, ZERO = "one", "ratio", "best-response-one", "zero"


@dataclass(frozen=True)
class CompletedGVector:
    values: np.ndarray
    provenance: tuple[str, ...]


def continuation_values(sf: SequenceForm, agent: int, x_other) -> np.ndarray:
    """Payoff of each sequence plus best-response play at every infoset below it."""
    seqs = sf[agent]
    val = sf.payoff_vector(agent, np.asarray(x_other, dtype=float)).copy()
    for _, par, kids in reversed(seqs.infosets):
        val[par] += val[kids].max()
    return val


def best_response_ties(sf: SequenceForm, agent: int, x_other, tol: float = 1e-9) -> dict[str, list[int]]:
    """infoset -> extending sequences whose continuation value is maximal (within tol)."""
    val = continuation_values(sf, agent, x_other)
    out = {}
    for h, _, kids in sf[agent].infosets:
        best = val[kids].max()
        out[h] = [k for k in kids if val[k] >= best - tol * max(1.0, abs(best))]
    return out


def _choices(sf, agent, x_other, tiebreak) -> dict[str, int]:
    ties = best_response_ties(sf, agent, x_other)
    chosen = {h: cands[0] for h, cands in ties.items()}
    for h, s in (tiebreak or {}).items():
        if h in chosen:
            if s not in ties[h]:
                raise ValueError(f"sequence {s} is not a best response at infoset {h}")
            chosen[h] = s
    return chosen


def completed_g_matrix(sf: SequenceForm, agent: int, x, x_other, tiebreak: dict[str, int] | None = None):
    """Rows g_q(x, x_other) for every q, with per-entry provenance.

    ``tiebreak`` maps an infoset to the extending sequence to use among tied
    best responses; by default the lowest index wins.
    """
    seqs = sf[agent]
    x = np.asarray(x, dtype=float)
    kind, den = seqs.g_rules
    chosen = _choices(sf, agent, x_other, tiebreak)
    on_br = np.array([s == 0 or chosen[seqs.last_infoset[s]] == s for s in range(len(seqs))])

    n = len(seqs)
    G = np.zeros((n, n))
    prov = np.full((n, n), ZERO, dtype=object)
    G[kind == G_ONE] = 1.0
    prov[kind == G_ONE] = ONE
    for q, s in zip(*np.nonzero(kind == G_RATIO)):
        d = den[q, s]
        if x[d] != 0:
            G[q, s] = x[s] / x[d]
            prov[q, s] = RATIO
        else:
            path = seqs.prefixes[s]
            below = path[path.index(d) + 1:]
            if all(on_br[t] for t in below):
                G[q, s] = 1.0
                prov[q, s] = BEST_RESPONSE
    return G, prov, chosen


def g_vector_completed(sf: SequenceForm, agent: int, x, x_other, q: int, tiebreak=None) -> CompletedGVector:
    G, prov, _ = completed_g_matrix(sf, agent, x, x_other, tiebreak)
    return CompletedGVector(G[q], tuple(prov[q]))


def _self_block(G, kind, den, x, v):
    """d xdot_i / d x_i for one agent, ratio entries differentiated in closed form."""
    n = len(x)
    live = (kind == G_RATIO) & (x[den] != 0)
    xd = np.where(live, x[den], 1.0)
    # sum_s dG[q, s]/dx_j v_s: +v_j / x(q') from the numerator, -x_s v_s / x(q')^2 from the denominator
    dGv = np.where(live, v[None, :] / xd, 0.0)
    contrib = np.where(live, x[None, :] * v[None, :] / xd**2, 0.0)
    for q, s in zip(*np.nonzero(live)):
        dGv[q, den[q, s]] -= contrib[q, s]
    growth = G @ v - x @ v
    return np.diag(growth) + x[:, None] * (dGv - v[None, :])


def jacobian(sf: SequenceForm, x1, x2, tiebreak: tuple[dict, dict] | None = None) -> np.ndarray:
    """Jacobian of the continuous sequence-form replicator in raw coordinates.

    Rows and columns run over agent-1 sequences followed by agent-2 sequences.
    Best-response entries of the completed g-vectors count as constants.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    tb = tiebreak or ({}, {})
    G1, _, _ = completed_g_matrix(sf, 0, x1, x2, tb[0])
    G2, _, _ = completed_g_matrix(sf, 1, x2, x1, tb[1])
    U1 = sf.payoffs[0].toarray()
    U2 = sf.payoffs[1].toarray()
    v1 = U1 @ x2
    v2 = U2.T @ x1
    J11 = _self_block(G1, *sf[0].g_rules, x1, v1)
    J22 = _self_block(G2, *sf[1].g_rules, x2, v2)
    J12 = x1[:, None] * ((G1 - x1[None, :]) @ U1)
    J21 = x2[:, None] * ((G2 - x2[None, :]) @ U2.T)
    return np.block([[J11, J12], [J21, J22]])


def _classify(eigs: np.ndarray, tol: float) -> str:
    if np.all(eigs.real < -tol):
        return "asymptotically-stable"
    if np.any(eigs.real > tol):
        return "unstable"
    return "inconclusive"


@dataclass
class StabilityReport:
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    classification: str
    tiebreaks: list[dict] = field(default_factory=list)
    # spectrum of the Jacobian compressed to the tangent space of the constraints
    tangent_eigenvalues: np.ndarray | None = None
    tangent_classification: str | None = None
    tangent_invariance: float | None = None

    def to_dict(self) -> dict:
        out = {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "classification": self.classification,
            "tiebreaks": self.tiebreaks,
        }
        if self.tangent_eigenvalues is not None:
            out["tangent_eigenvalues"] = [[float(z.real), float(z.imag)] for z in self.tangent_eigenvalues]
            out["tangent_classification"] = self.tangent_classification
            out["tangent_invariance"] = self.tangent_invariance
        return out


def classify_stability(J, tol: float = 1e-9) -> StabilityReport:
    """Spectrum-based verdict: every real part < -tol is stable, any > tol unstable."""
    J = np.asarray(J, dtype=float)
    eigs = sort_spectrum(eigenvalues(J))
    return StabilityReport(J, eigs, _classify(eigs, tol))


def tangent_basis(sf: SequenceForm) -> np.ndarray:
    """Orthonormal basis of the null space of both agents' constraint matrices."""
    E1, _ = sf[0].constraints
    E2, _ = sf[1].constraints
    E = np.block([[E1, np.zeros((E1.shape[0], E2.shape[1]))], [np.zeros((E2.shape[0], E1.shape[1])), E2]])
    _, sv, vt = np.linalg.svd(E)
    rank = int(np.sum(sv > 1e-10 * sv[0]))
    return vt[rank:].T


def analyze_stability(sf: SequenceForm, x1, x2, tiebreak=None, tol: float = 1e-9) -> StabilityReport:
    J = jacobian(sf, x1, x2, tiebreak)
    report = classify_stability(J, tol)
    tb = tiebreak or ({}, {})
    for agent, (x, xo) in enumerate(((x1, x2), (x2, x1))):
        chosen = _choices(sf, agent, xo, tb[agent])
        seqs = sf[agent]
        for h, par, _ in seqs.infosets:
            if np.asarray(x)[par] == 0:
                report.tiebreaks.append({"agent": agent + 1, "infoset": h, "chosen": seqs.labels[chosen[h]]})
    N = tangent_basis(sf)
    if N.shape[1]:
        JT = N.T @ J @ N
        report.tangent_eigenvalues = sort_spectrum(eigenvalues(JT))
        report.tangent_classification = _classify(report.tangent_eigenvalues, tol)
        report.tangent_invariance = float(np.linalg.norm(J @ N - N @ JT))
    return report


def tiebreak_variants(sf: SequenceForm, x1, x2):
    """Every combination of best-response choices at zero-probability infosets with ties."""
    options = []
    for agent, (x, xo) in enumerate(((x1, x2), (x2, x1))):
        ties = best_response_ties(sf, agent, xo)
        for h, par, _ in sf[agent].infosets:
            if np.asarray(x)[par] == 0 and len(ties[h]) > 1:
                options.append((agent, h, ties[h]))
    for combo in itertools.product(*(cands for _, _, cands in options)):
        tb = ({}, {})
        for (agent, h, _), s in zip(options, combo):
            tb[agent][h] = s
        yield tb


def rest_point_residual(sf: SequenceForm, x1, x2) -> float:
    from .dynamics import continuous_rhs_sequence

    d1, d2 = continuous_rhs_sequence(sf, x1, x2)
    return float(max(np.abs(d1).max(), np.abs(d2).max()))
