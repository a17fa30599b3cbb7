"""Replicator dynamics on the sequence form, with the normal-form baseline.

Sequence-form strategies are plain float arrays aligned with
``SequenceForm[agent].sequences``; normal-form ones with ``NormalForm.plans``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .forms import G_ONE, G_RATIO, NormalForm, SequenceForm, constraint_residual
from .numerics import bilinear


class PayoffPositivityError(ValueError):
    """A discrete replicator step needs a positive expected payoff for each agent."""


class DriftError(RuntimeError):
    def __init__(self, step: int, residual: float, tol: float):
        super().__init__(f"constraint residual {residual:.3e} exceeds drift tolerance {tol:.1e} at step {step}")
        self.step = step
        self.residual = residual


class DriftWarning(UserWarning):
    pass


def expected_payoff(sf: SequenceForm, x1, x2, agent: int) -> float:
    return bilinear(sf.payoffs[agent], x1, x2)


def g_vector(sf: SequenceForm, agent: int, x, q: int) -> np.ndarray:
    """Replication direction for sequence ``q`` (index) given strategy ``x``.

    Ones on every prefix of q; for every infoset h that hangs off a prefix q'
    and that q does not cross, each sequence through h gets x(q'')/x(q')
    (zero when x(q') = 0); everything else is zero.
    """
    seqs = sf[agent]
    x = np.asarray(x, dtype=float)
    g = np.zeros(len(seqs))
    path = seqs.prefixes[q]
    crossed = {seqs.last_infoset[s] for s in path[1:]}
    children = _children(sf, agent)
    for qp in path:
        g[qp] = 1.0
        for h, par, kids in seqs.infosets:
            if par != qp or h in crossed:
                continue
            stack = list(kids)
            while stack:
                s = stack.pop()
                g[s] = x[s] / x[qp] if x[qp] != 0 else 0.0
                stack.extend(children[s])
    return g


def _children(sf: SequenceForm, agent: int) -> list[list[int]]:
    seqs = sf[agent]
    out: list[list[int]] = [[] for _ in range(len(seqs))]
    for _, par, kids in seqs.infosets:
        out[par].extend(kids)
    return out


def g_matrix(sf: SequenceForm, agent: int, x) -> np.ndarray:
    """All g-vectors at once, row q holding g_q(x)."""
    kind, den = sf[agent].g_rules
    x = np.asarray(x, dtype=float)
    d = x[den]
    ratio = np.divide(np.broadcast_to(x, kind.shape), d, out=np.zeros(kind.shape), where=(d != 0))
    return np.where(kind == G_ONE, 1.0, np.where(kind == G_RATIO, ratio, 0.0))


def _payoff_vectors(sf: SequenceForm, x1, x2):
    return sf.payoff_vector(0, x2), sf.payoff_vector(1, x1)


def _checked_average(avg: float, agent: int) -> float:
    if not avg > 0:
        raise PayoffPositivityError(
            f"agent {agent + 1} has expected payoff {avg:.6g} <= 0; the discrete replicator needs positive "
            "payoffs (shift every payoff by a constant, e.g. ReplicatorConfig(payoff_shift=c))"
        )
    return avg


def discrete_step_sequence(sf: SequenceForm, x1, x2) -> tuple[np.ndarray, np.ndarray]:
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    v1, v2 = _payoff_vectors(sf, x1, x2)
    avg1 = _checked_average(float(x1 @ v1), 0)
    avg2 = _checked_average(float(x2 @ v2), 1)
    n1 = x1 * (g_matrix(sf, 0, x1) @ v1) / avg1
    n2 = x2 * (g_matrix(sf, 1, x2) @ v2) / avg2
    return n1, n2


def naive_discrete_step_sequence(sf: SequenceForm, x1, x2) -> tuple[np.ndarray, np.ndarray]:
    """The normal-form update with unit vectors e_q; breaks the sequence-form constraints."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    v1, v2 = _payoff_vectors(sf, x1, x2)
    avg1 = _checked_average(float(x1 @ v1), 0)
    avg2 = _checked_average(float(x2 @ v2), 1)
    return x1 * v1 / avg1, x2 * v2 / avg2


def discrete_step_normal(nf: NormalForm, pi1, pi2) -> tuple[np.ndarray, np.ndarray]:
    pi1 = np.asarray(pi1, dtype=float)
    pi2 = np.asarray(pi2, dtype=float)
    v1 = nf.payoffs[0] @ pi2
    v2 = pi1 @ nf.payoffs[1]
    avg1 = _checked_average(float(pi1 @ v1), 0)
    avg2 = _checked_average(float(v2 @ pi2), 1)
    return pi1 * v1 / avg1, pi2 * v2 / avg2


def continuous_rhs_sequence(sf: SequenceForm, x1, x2) -> tuple[np.ndarray, np.ndarray]:
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    v1, v2 = _payoff_vectors(sf, x1, x2)
    d1 = x1 * (g_matrix(sf, 0, x1) @ v1 - x1 @ v1)
    d2 = x2 * (g_matrix(sf, 1, x2) @ v2 - x2 @ v2)
    return d1, d2


def continuous_rhs_normal(nf: NormalForm, pi1, pi2) -> tuple[np.ndarray, np.ndarray]:
    pi1 = np.asarray(pi1, dtype=float)
    pi2 = np.asarray(pi2, dtype=float)
    v1 = nf.payoffs[0] @ pi2
    v2 = pi1 @ nf.payoffs[1]
    return pi1 * (v1 - pi1 @ v1), pi2 * (v2 - pi2 @ v2)


def renormalize_sequence(sf: SequenceForm, agent: int, x) -> np.ndarray:
    """Project back onto the constraints by proportional rescaling, root first."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    x[0] = 1.0
    for _, par, kids in sf[agent].infosets:  # discovery order visits parents first
        total = x[kids].sum()
        if total > 0:
            x[kids] *= x[par] / total
        else:
            x[kids] = x[par] / len(kids)
    return x


def renormalize_normal(pi) -> np.ndarray:
    pi = np.clip(np.asarray(pi, dtype=float), 0.0, None)
    return pi / pi.sum()


def normal_residual(pi) -> float:
    pi = np.asarray(pi, dtype=float)
    return max(abs(pi.sum() - 1.0), float(max(0.0, -pi.min())))


def sequence_residual(sf: SequenceForm, agent: int, x) -> float:
    x = np.asarray(x, dtype=float)
    return max(constraint_residual(sf, agent, x), float(max(0.0, -x.min())))


@dataclass(frozen=True)
class ReplicatorConfig:
    mode: Literal["discrete", "continuous"] = "discrete"
    representation: Literal["sequence", "normal", "naive-sequence"] = "sequence"
    steps: int = 100
    dt: float = 1e-2
    integrator: Literal["euler", "rk4"] = "rk4"
    renormalize: bool | None = None  # None: on for continuous, off for discrete
    drift_tol: float = 1e-6
    payoff_shift: float = 0.0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.mode not in ("discrete", "continuous"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.representation not in ("sequence", "normal", "naive-sequence"):
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.integrator not in ("euler", "rk4"):
            raise ValueError(f"unknown integrator {self.integrator!r}")

    @property
    def renormalizing(self) -> bool:
        return self.mode == "continuous" if self.renormalize is None else self.renormalize


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    x1: np.ndarray
    x2: np.ndarray
    u1: float
    u2: float
    residual: float  # measured before any renormalization


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f(tuple(a + 0.5 * dt * b for a, b in zip(y, k1)))
    k3 = f(tuple(a + 0.5 * dt * b for a, b in zip(y, k2)))
    k4 = f(tuple(a + dt * b for a, b in zip(y, k3)))
    return tuple(a + dt / 6.0 * (p + 2 * q + 2 * r + s) for a, p, q, r, s in zip(y, k1, k2, k3, k4))


def _euler(f, y, dt):
    return tuple(a + dt * b for a, b in zip(y, f(y)))


def integrate_trajectory(form, profile0, cfg: ReplicatorConfig) -> list[TrajectoryPoint]:
    """Run ``cfg.steps`` steps from ``profile0``; returns the initial point plus one point per step."""
    rep = cfg.representation
    if rep == "normal" and not isinstance(form, NormalForm):
        raise TypeError("the normal representation needs a NormalForm")
    if rep != "normal" and not isinstance(form, SequenceForm):
        raise TypeError(f"the {rep} representation needs a SequenceForm")
    if rep == "naive-sequence" and cfg.mode != "discrete":
        raise ValueError("the naive sequence update only exists in discrete time")

    shift = cfg.payoff_shift
    if shift:
        form = form.shifted(shift)

    if rep == "normal":
        def payoffs(y):
            return float(y[0] @ form.payoffs[0] @ y[1]), float(y[0] @ form.payoffs[1] @ y[1])

        def residual(y):
            return max(normal_residual(y[0]), normal_residual(y[1]))

        def project(y):
            return renormalize_normal(y[0]), renormalize_normal(y[1])

        step_fn = lambda y: discrete_step_normal(form, *y)  # noqa: E731
        rhs = lambda y: continuous_rhs_normal(form, *y)  # noqa: E731
    else:
        def payoffs(y):
            return expected_payoff(form, *y, 0), expected_payoff(form, *y, 1)

        def residual(y):
            return max(sequence_residual(form, 0, y[0]), sequence_residual(form, 1, y[1]))

        def project(y):
            return renormalize_sequence(form, 0, y[0]), renormalize_sequence(form, 1, y[1])

        step_fn = (lambda y: naive_discrete_step_sequence(form, *y)) if rep == "naive-sequence" \
            else (lambda y: discrete_step_sequence(form, *y))
        rhs = lambda y: continuous_rhs_sequence(form, *y)  # noqa: E731

    def point(t, y, res):
        u1, u2 = payoffs(y)
        return TrajectoryPoint(t, y[0].copy(), y[1].copy(), u1 - shift, u2 - shift, res)

    y = tuple(np.asarray(v, dtype=float).copy() for v in profile0)
    out = [point(0.0, y, residual(y))]
    advance = _rk4 if cfg.integrator == "rk4" else _euler
    for k in range(1, cfg.steps + 1):
        if cfg.mode == "discrete":
            y = step_fn(y)
            t = float(k)
        else:
            y = advance(rhs, y, cfg.dt)
            t = k * cfg.dt
        res = residual(y)
        if res > cfg.drift_tol and not cfg.renormalizing:
            if rep == "naive-sequence":
                warnings.warn(f"step {k}: constraint residual {res:.3e}", DriftWarning, stacklevel=2)
            else:
                raise DriftError(k, res, cfg.drift_tol)
        if cfg.renormalizing:
            y = project(y)
        out.append(point(t, y, res))
    return out
