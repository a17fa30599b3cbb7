"""Command-line entry point: ``seqdyn <command> ...``.

Exit codes:

====  ==================================================================
0     success
1     negative verdict (profiles are not realization equivalent)
2     usage error (bad flags)
3     invalid game (parses but fails validation)
4     bad input (unreadable file, malformed JSON, unknown labels, ...)
5     drift abort (constraint residual above tolerance)
6     eigensolver failure
7     discrete step with a non-positive expected payoff
8     stability requested at a profile that is not a rest point
9     plan cap exceeded while building a normal form
====  ==================================================================

Every failure prints one JSON line ``{"error": ..., "exit": ..., "message": ...}``
on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
import warnings

import numpy as np

from . import io as gio
from .dynamics import (
    DriftError,
    DriftWarning,
    PayoffPositivityError,
    ReplicatorConfig,
    discrete_step_normal,
    discrete_step_sequence,
    integrate_trajectory,
)
from .forms import build_normal_form, build_sequence_form, check_sequence_constraints
from .game_tree import PLAN_CAP, PlanCapError, comb_game, count_reduced_plans
from .numerics import EigenSolverError
from .stability import analyze_stability, rest_point_residual, tiebreak_variants
from .strategies import (
    NormalStrategy,
    SequenceStrategy,
    behavioral_to_normal,
    behavioral_to_sequence,
    is_realization_equivalent,
    random_behavioral,
    uniform_behavioral,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INVALID_GAME, EXIT_BAD_INPUT = 0, 1, 2, 3, 4
EXIT_DRIFT, EXIT_EIGEN, EXIT_PAYOFF, EXIT_NOT_REST, EXIT_PLAN_CAP = 5, 6, 7, 8, 9


class CommandError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CommandError(EXIT_USAGE, "usage", f"{self.prog}: {message}")


def _emit_error(kind: str, code: int, message: str) -> None:
    print(json.dumps({"error": kind, "exit": code, "message": " ".join(message.split())}), file=sys.stderr)


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_game(path):
    try:
        return gio.load_game(path)
    except OSError as exc:
        raise CommandError(EXIT_BAD_INPUT, "bad-input", str(exc)) from exc


def _check_profile(sf, vectors, tol=1e-9):
    for agent, x in enumerate(vectors):
        bad = check_sequence_constraints(sf, agent, x, tol)
        if bad:
            raise CommandError(EXIT_BAD_INPUT, "bad-input",
                               f"agent {agent + 1} profile violates the sequence constraints: {bad[0]}")


# -- commands -----------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        g = gio.load_game(args.file)
    except gio.InvalidGameError as exc:
        report = {"valid": False, "violations": [
            {"kind": v.kind, "detail": v.detail, "where": list(v.where)} for v in exc.violations
        ]}
        sys.stdout.write(gio.canonical_json(report))
        raise
    except OSError as exc:
        raise CommandError(EXIT_BAD_INPUT, "bad-input", str(exc)) from exc
    sf = build_sequence_form(g)
    report = {
        "valid": True,
        "players": list(g.players),
        "decision_nodes": sum(1 for n in g.nodes.values() if not hasattr(n, "payoffs")),
        "terminals": len(g.terminals),
        "infosets": [len(g.agent_infosets(i)) for i in (0, 1)],
        "sequences": [len(sf[i]) for i in (0, 1)],
        "reduced_plans_upper_bound": [count_reduced_plans(g, i) for i in (0, 1)],
    }
    sys.stdout.write(gio.canonical_json(report))
    return EXIT_OK


def cmd_forms(args) -> int:
    g = _load_game(args.file)
    if args.emit == "sequence":
        doc = gio.sequence_form_to_dict(build_sequence_form(g))
    else:
        doc = gio.normal_form_to_dict(build_normal_form(g, reduced=args.emit == "reduced", cap=args.plan_cap))
    _write(gio.canonical_json(doc), args.out)
    return EXIT_OK


_REPS = {"seq": "sequence", "normal": "normal", "naive-seq": "naive-sequence"}


def cmd_run(args) -> int:
    g = _load_game(args.file)
    rep = _REPS[args.rep]
    sf = build_sequence_form(g)
    nf = build_normal_form(g, reduced=True, cap=args.plan_cap) if rep == "normal" else None
    if args.init == "uniform":
        sigma = [uniform_behavioral(g, i) for i in (0, 1)]
        if rep == "normal":
            profile = [behavioral_to_normal(s, nf).probs for s in sigma]
        else:
            profile = [behavioral_to_sequence(s, sf).probs for s in sigma]
    else:
        doc = gio.load_json(args.init)
        if rep == "normal":
            profile = gio.normal_profile(doc, nf, sf)
        else:
            profile = gio.sequence_profile(doc, sf)
            _check_profile(sf, profile)

    cfg = ReplicatorConfig(
        mode=args.time,
        representation=rep,
        steps=args.steps,
        dt=args.dt,
        integrator=args.integrator,
        renormalize=None if args.renormalize is None else args.renormalize == "on",
        drift_tol=args.drift_tol,
        payoff_shift=args.shift,
    )
    form = nf if rep == "normal" else sf
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DriftWarning)
        points = integrate_trajectory(form, profile, cfg)
    drift = [w for w in caught if issubclass(w.category, DriftWarning)]
    if drift:
        worst = max(p.residual for p in points)
        print(json.dumps({"warning": "constraint-drift", "steps": len(drift), "max_residual": worst}), file=sys.stderr)
    labels = (nf.labels(0), nf.labels(1)) if rep == "normal" else (sf[0].labels, sf[1].labels)
    _write(gio.trajectory_csv(points, labels), args.out)
    return EXIT_OK


def cmd_stability(args) -> int:
    g = _load_game(args.file)
    sf = build_sequence_form(g)
    doc = gio.load_json(args.profile)
    nf = None
    kind, _ = gio.parse_profile(doc, g, "sequence")
    if kind == "normal":
        nf = build_normal_form(g, reduced=True, cap=args.plan_cap)
    x1, x2 = gio.sequence_profile(doc, sf, nf)
    _check_profile(sf, (x1, x2))
    residual = rest_point_residual(sf, x1, x2)
    if residual > args.rest_tol:
        raise CommandError(EXIT_NOT_REST, "not-rest-point",
                           f"vector field norm {residual:.3e} exceeds rest tolerance {args.rest_tol:.1e}")
    report = analyze_stability(sf, x1, x2, tol=args.class_tol)
    out = report.to_dict()
    out["rest_residual"] = residual
    out["sequences"] = [sf[0].labels, sf[1].labels]
    out["jacobian"] = report.jacobian.tolist()
    # how far the spectrum moves across the admissible tie-breaks
    spread, count = 0.0, 0
    for tb in tiebreak_variants(sf, x1, x2):
        other = analyze_stability(sf, x1, x2, tiebreak=tb, tol=args.class_tol)
        spread = max(spread, float(np.max(np.abs(other.eigenvalues - report.eigenvalues))))
        count += 1
    out["tiebreak_variants"] = count
    out["tiebreak_spectrum_spread"] = spread
    _write(gio.canonical_json(out), args.out)
    return EXIT_OK


def cmd_equiv(args) -> int:
    g = _load_game(args.file)
    sf = build_sequence_form(g)
    ndoc = gio.load_json(args.normal)
    sdoc = gio.load_json(args.sequence)
    nf = build_normal_form(g, reduced=True, cap=args.plan_cap)
    kind, entries = gio.parse_profile(ndoc, g, "normal")
    if kind == "normal" and not all(set(entries[i]) <= set(nf.labels(i)) for i in (0, 1)):
        nf = build_normal_form(g, reduced=False, cap=args.plan_cap)
    pi = gio.normal_profile(ndoc, nf, sf)
    x = gio.sequence_profile(sdoc, sf, nf)
    _check_profile(sf, x)
    for agent, p in enumerate(pi):
        if abs(p.sum() - 1.0) > 1e-9 or p.min() < -1e-12:
            raise CommandError(EXIT_BAD_INPUT, "bad-input", f"agent {agent + 1} normal strategy is not a distribution")
    normal = tuple(NormalStrategy(nf, i, pi[i]) for i in (0, 1))
    seq = tuple(SequenceStrategy(sf, i, x[i]) for i in (0, 1))
    ok, gap = is_realization_equivalent(g, normal, seq, tol=args.tol)
    reach_n = nf.realization(*pi)
    reach_s = np.array([x[0][a] * x[1][b] for _, a, b in sf.terminal_pairs])
    out = {
        "equivalent": ok,
        "max_gap": gap,
        "tol": args.tol,
        "reach": {t: [float(a), float(b)] for t, a, b in zip(g.terminals, reach_n, reach_s)},
    }
    _write(gio.canonical_json(out), args.out)
    return EXIT_OK if ok else EXIT_NEGATIVE


def _parse_depths(text: str) -> list[int]:
    lo, sep, hi = text.partition("..")
    try:
        depths = list(range(int(lo), int(hi) + 1)) if sep else [int(lo)]
    except ValueError as exc:
        raise CommandError(EXIT_USAGE, "usage", f"--depth expects d or a..b, got {text!r}") from exc
    if not depths or min(depths) < 1 or max(depths) > 8:
        raise CommandError(EXIT_USAGE, "usage", f"--depth must lie in 1..8, got {text!r}")
    return depths


def _per_call(fn, budget=0.02) -> float:
    """Seconds per call of ``fn``, repeating it until ``budget`` seconds have passed."""
    n = 1
    while True:
        start = time.perf_counter()
        for _ in range(n):
            fn()
        elapsed = time.perf_counter() - start
        if elapsed >= budget:
            return elapsed / n
        n *= 2


def bench_rows(depths, branching=2, trials=5, seed=0):
    """One row per depth: sizes of both representations and best-of-trials step times."""
    rows = []
    for d in depths:
        g = comb_game(d, branching, seed=seed)
        sf = build_sequence_form(g)
        nf = build_normal_form(g, reduced=True)
        rng = np.random.default_rng([seed, d])
        t_norm, t_seq = [], []
        for _ in range(trials):
            sigma = [random_behavioral(g, i, rng) for i in (0, 1)]
            x = [behavioral_to_sequence(s, sf).probs for s in sigma]
            pi = [behavioral_to_normal(s, nf).probs for s in sigma]
            t_norm.append(_per_call(lambda: discrete_step_normal(nf, *pi)))
            t_seq.append(_per_call(lambda: discrete_step_sequence(sf, *x)))
        rows.append({
            "depth": d,
            "branching": branching,
            "sequences_1": len(sf[0]),
            "sequences_2": len(sf[1]),
            "reduced_plans_1": len(nf.plans[0]),
            "reduced_plans_2": len(nf.plans[1]),
            "normal_step_seconds": min(t_norm),
            "sequence_step_seconds": min(t_seq),
        })
        rows[-1]["ratio"] = rows[-1]["sequence_step_seconds"] / rows[-1]["normal_step_seconds"]
    return rows


def cmd_bench(args) -> int:
    if args.trials < 1:
        raise CommandError(EXIT_USAGE, "usage", "--trials must be >= 1")
    if args.branching < 2:
        raise CommandError(EXIT_USAGE, "usage", "--branching must be >= 2")
    rows = bench_rows(_parse_depths(args.depth), args.branching, args.trials, args.seed)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: format(v, ".17g") if isinstance(v, float) else v for k, v in r.items()})
    _write(buf.getvalue(), args.out)
    return EXIT_OK


# -- wiring -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="seqdyn", description="Replicator dynamics on the sequence form of two-player games.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, game=True):
        if game:
            sp.add_argument("file", help="game JSON file")
        sp.add_argument("--out", help="write the result here instead of stdout")
        sp.add_argument("--plan-cap", type=int, default=PLAN_CAP, help="refuse normal forms with more plans")

    sp = sub.add_parser("validate", help="check a game file")
    sp.add_argument("file")
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("forms", help="dump the normal, reduced normal or sequence form")
    common(sp)
    sp.add_argument("--emit", choices=["normal", "reduced", "sequence"], default="sequence")
    sp.set_defaults(fn=cmd_forms)

    sp = sub.add_parser("run", help="integrate the replicator dynamics and print a trajectory CSV")
    common(sp)
    sp.add_argument("--rep", choices=list(_REPS), default="seq")
    sp.add_argument("--time", choices=["discrete", "continuous"], default="discrete")
    sp.add_argument("--steps", type=int, default=100)
    sp.add_argument("--dt", type=float, default=1e-2)
    sp.add_argument("--integrator", choices=["euler", "rk4"], default="rk4")
    sp.add_argument("--init", default="uniform", help="'uniform' or a profile JSON file")
    sp.add_argument("--renormalize", choices=["on", "off"], default=None,
                    help="project back onto the constraints after each step (default: on for continuous time)")
    sp.add_argument("--drift-tol", type=float, default=1e-6)
    sp.add_argument("--shift", type=float, default=0.0, help="add a constant to every payoff")
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("stability", help="Jacobian spectrum at a rest point")
    common(sp)
    sp.add_argument("--profile", required=True, help="profile JSON file")
    sp.add_argument("--rest-tol", type=float, default=1e-8, help="max |vector field| accepted as a rest point")
    sp.add_argument("--class-tol", type=float, default=1e-9, help="real parts within this of 0 count as 0")
    sp.set_defaults(fn=cmd_stability)

    sp = sub.add_parser("equiv", help="compare a normal-form and a sequence-form profile")
    common(sp)
    sp.add_argument("--normal", required=True, help="normal-form (or behavioral) profile JSON")
    sp.add_argument("--sequence", required=True, help="sequence-form (or behavioral) profile JSON")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(fn=cmd_equiv)

    sp = sub.add_parser("bench", help="size and step-time comparison on the comb family")
    common(sp, game=False)
    sp.add_argument("--depth", default="1..8", help="d or a..b, within 1..8")
    sp.add_argument("--branching", type=int, default=2)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_bench)
    return p


_FAILURES = (
    (gio.InvalidGameError, EXIT_INVALID_GAME, "invalid-game"),
    (gio.GameFormatError, EXIT_BAD_INPUT, "bad-input"),
    (DriftError, EXIT_DRIFT, "drift"),
    (EigenSolverError, EXIT_EIGEN, "eigensolver"),
    (PayoffPositivityError, EXIT_PAYOFF, "payoff-positivity"),
    (PlanCapError, EXIT_PLAN_CAP, "plan-cap"),
    (OSError, EXIT_BAD_INPUT, "bad-input"),
)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except CommandError as exc:
        _emit_error(exc.kind, exc.code, str(exc))
        return exc.code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:
        for cls, code, kind in _FAILURES:
            if isinstance(exc, cls):
                _emit_error(kind, code, str(exc))
                return code
        if isinstance(exc, ValueError):
            _emit_error("bad-input", EXIT_BAD_INPUT, str(exc))
            return EXIT_BAD_INPUT
        raise


if __name__ == "__main__":
    sys.exit(main())
