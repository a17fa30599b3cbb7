import csv
import io
import json

import numpy as np
import pytest

from seqdyn import build_example_fig1
from seqdyn.cli import main
from seqdyn.io import (
    GameFormatError,
    InvalidGameError,
    canonical_json,
    game_from_dict,
    game_to_dict,
    load_json,
    profile_to_dict,
    sequence_profile,
)

EXAMPLE_PROFILE = {
    "kind": "sequence",
    "1": {"": 1, "L1": 1 / 3, "R1": 2 / 3, "R1L2": 1 / 3, "R1R2": 1 / 3, "R1L3": 0, "R1R3": 2 / 3},
    "2": {"": 1, "l": 1, "r": 0},
}


@pytest.fixture
def files(tmp_path):
    game = tmp_path / "fig1.json"
    game.write_text(canonical_json(game_to_dict(build_example_fig1())))
    prof = tmp_path / "profile.json"
    prof.write_text(json.dumps(EXAMPLE_PROFILE))
    return tmp_path, game, prof


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def error_of(err):
    lines = err.strip().splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


def rows(text):
    return list(csv.reader(io.StringIO(text)))


# -- game files ---------------------------------------------------------------

def test_game_round_trip():
    g = build_example_fig1()
    again = game_from_dict(json.loads(canonical_json(game_to_dict(g))))
    assert again.nodes == g.nodes and again.root == g.root


def test_players_may_be_given_by_number():
    doc = game_to_dict(build_example_fig1())
    for node in doc["nodes"].values():
        if node["type"] == "decision":
            node["player"] = int(node["player"])
    assert game_from_dict(doc).nodes == build_example_fig1().nodes


@pytest.mark.parametrize(
    "mutate, match",
    [
        (lambda d: d.update(extra=1), "unknown field"),
        (lambda d: d["nodes"]["t1"].update(weight=2), "unknown field"),
        (lambda d: d["nodes"]["1.1"]["actions"][0].update(prob=1), "unknown field"),
        (lambda d: d["nodes"]["t1"].pop("payoffs"), "missing field"),
        (lambda d: d["nodes"].update(c={"type": "chance"}), "chance"),
        (lambda d: d["nodes"]["t1"].update(type="leaf"), "unknown node type"),
        (lambda d: d["nodes"]["t1"].update(payoffs=[1, "x"]), "finite number"),
        (lambda d: d["nodes"]["1.1"].update(player="3"), "unknown player"),
    ],
)
def test_strict_parsing(mutate, match):
    doc = game_to_dict(build_example_fig1())
    mutate(doc)
    with pytest.raises(GameFormatError, match=match):
        game_from_dict(doc)


def test_invalid_game_carries_violations():
    doc = game_to_dict(build_example_fig1())
    doc["nodes"]["2.1"]["actions"][0]["child"] = "nowhere"
    with pytest.raises(InvalidGameError) as info:
        game_from_dict(doc)
    assert info.value.violations[0].kind == "dangling child"


# -- validate -----------------------------------------------------------------

def test_validate_ok(capsys, files):
    _, game, _ = files
    code, out, _ = run(capsys, "validate", game)
    assert code == 0
    report = json.loads(out)
    assert report["valid"] and report["sequences"] == [7, 3]


def test_validate_invalid_game(capsys, files):
    tmp, _, _ = files
    doc = game_to_dict(build_example_fig1())
    doc["nodes"]["1.3"]["infoset"] = "2.1"
    bad = tmp / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, err = run(capsys, "validate", bad)
    assert code == 3
    assert json.loads(out)["valid"] is False
    assert error_of(err)["error"] == "invalid-game"


@pytest.mark.parametrize("content", ["{not json", '{"players": ["a", "b"], "root": "r", "nodes": {}, "x": 1}'])
def test_validate_bad_input(capsys, tmp_path, content):
    f = tmp_path / "g.json"
    f.write_text(content)
    code, _, err = run(capsys, "validate", f)
    assert code == 4
    assert error_of(err)["exit"] == 4


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "validate", tmp_path / "nope.json")
    assert code == 4 and error_of(err)["error"] == "bad-input"


def test_usage_error_is_one_json_line(capsys):
    code, _, err = run(capsys, "run")
    assert code == 2 and error_of(err)["error"] == "usage"


# -- forms --------------------------------------------------------------------

def test_forms_reduced(capsys, files):
    _, game, _ = files
    code, out, _ = run(capsys, "forms", game, "--emit", "reduced")
    doc = json.loads(out)
    assert code == 0
    assert doc["plans"][0] == ["L1*", "R1L2L3", "R1L2R3", "R1R2L3", "R1R2R3"]
    assert doc["payoffs"][0][0] == [2.0, 2.0]


def test_forms_normal_plan_cap(capsys, files):
    _, game, _ = files
    code, _, err = run(capsys, "forms", game, "--emit", "normal", "--plan-cap", "4")
    assert code == 9 and error_of(err)["error"] == "plan-cap"


def test_forms_sequence_round_trip(capsys, files):
    # dumped sequence labels -> profile -> vectors -> profile is byte-identical
    tmp, game, _ = files
    code, out, _ = run(capsys, "forms", game, "--emit", "sequence")
    assert code == 0
    dump = json.loads(out)
    labels = tuple(a["sequences"] for a in dump["agents"])
    values = tuple([float(k + 1) / 8 for k in range(len(lab))] for lab in labels)
    text = canonical_json(profile_to_dict("sequence", labels, values))
    from seqdyn import build_sequence_form

    sf = build_sequence_form(build_example_fig1())
    vecs = sequence_profile(json.loads(text), sf)
    assert canonical_json(profile_to_dict("sequence", (sf[0].labels, sf[1].labels), vecs)) == text
    # and the emitted form itself is stable
    _, again, _ = run(capsys, "forms", game, "--emit", "sequence")
    assert again == out


# -- run ----------------------------------------------------------------------

def test_run_example_row(capsys, files):
    _, game, prof = files
    code, out, _ = run(capsys, "run", game, "--rep", "seq", "--time", "discrete", "--steps", "1", "--init", prof)
    assert code == 0
    table = rows(out)
    assert table[0][:4] == ["t", "1:", "1:L1", "1:R1"] and table[0][-3:] == ["u1", "u2", "residual"]
    got = np.array(table[2][1:11], dtype=float)
    np.testing.assert_allclose(got, [1, 0.25, 0.75, 0.375, 0.375, 0, 0.75, 1, 1, 0], atol=1e-12)


def test_run_naive_flags_but_does_not_abort(capsys, files):
    _, game, prof = files
    code, out, err = run(capsys, "run", game, "--rep", "naive-seq", "--steps", "1", "--init", prof)
    assert code == 0
    assert float(rows(out)[2][-1]) > 0
    assert json.loads(err.strip())["warning"] == "constraint-drift"


def test_run_is_deterministic(capsys, files):
    tmp, game, _ = files
    a, b = tmp / "a.csv", tmp / "b.csv"
    for path in (a, b):
        assert run(capsys, "run", game, "--time", "continuous", "--steps", "20", "--out", path)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_normal_uses_plan_columns(capsys, files):
    _, game, _ = files
    code, out, _ = run(capsys, "run", game, "--rep", "normal", "--steps", "2")
    assert code == 0
    assert rows(out)[0][1:6] == ["1:L1*", "1:R1L2L3", "1:R1L2R3", "1:R1R2L3", "1:R1R2R3"]


def test_run_sequence_profile_into_normal(capsys, files):
    _, game, prof = files
    code, out, _ = run(capsys, "run", game, "--rep", "normal", "--steps", "1", "--init", prof)
    assert code == 0
    np.testing.assert_allclose(np.array(rows(out)[2][1:6], dtype=float), [0.25, 0, 0.375, 0, 0.375], atol=1e-12)


def test_run_behavioral_profile(capsys, files):
    tmp, game, _ = files
    prof = tmp / "b.json"
    prof.write_text(json.dumps({"1": {"1.1:L1": 0.5, "1.1:R1": 0.5, "1.2:L2": 1, "1.3:R3": 1}, "2": {"2.1:l": 1}}))
    code, out, _ = run(capsys, "run", game, "--steps", "1", "--init", prof)
    assert code == 0
    np.testing.assert_allclose(np.array(rows(out)[1][1:8], dtype=float), [1, 0.5, 0.5, 0.5, 0, 0, 0.5])


def test_run_rejects_infeasible_profile(capsys, files):
    tmp, game, _ = files
    prof = tmp / "bad.json"
    prof.write_text(json.dumps({"kind": "sequence", "1": {"": 1, "L1": 0.9}, "2": {"": 1, "l": 1}}))
    code, _, err = run(capsys, "run", game, "--init", prof)
    assert code == 4 and "sequence constraints" in error_of(err)["message"]


def test_run_unknown_label(capsys, files):
    tmp, game, _ = files
    prof = tmp / "bad.json"
    prof.write_text(json.dumps({"kind": "sequence", "1": {"": 1, "X9": 1}, "2": {"": 1}}))
    code, _, err = run(capsys, "run", game, "--init", prof)
    assert code == 4 and "X9" in error_of(err)["message"]


def test_run_payoff_positivity(capsys, tmp_path):
    doc = game_to_dict(build_example_fig1().shift_payoffs(-10))
    game = tmp_path / "neg.json"
    game.write_text(json.dumps(doc))
    code, _, err = run(capsys, "run", game)
    assert code == 7 and error_of(err)["error"] == "payoff-positivity"
    assert run(capsys, "run", game, "--shift", "20", "--steps", "2")[0] == 0


def test_run_drift_abort(capsys, files):
    _, game, _ = files
    code, _, err = run(capsys, "run", game, "--time", "continuous", "--renormalize", "off",
                       "--drift-tol", "1e-300", "--steps", "50", "--dt", "0.3")
    assert code == 5 and error_of(err)["error"] == "drift"


# -- stability ----------------------------------------------------------------

def test_stability_degenerate_profile(capsys, files):
    tmp, game, _ = files
    prof = tmp / "deg.json"
    prof.write_text(json.dumps({"kind": "sequence", "1": {"": 1, "L1": 1}, "2": {"": 1, "l": 1}}))
    code, out, _ = run(capsys, "stability", game, "--profile", prof)
    assert code == 0
    rep = json.loads(out)
    assert rep["tiebreak_variants"] == 4
    assert rep["tiebreak_spectrum_spread"] <= 1e-8
    assert rep["tangent_classification"] == "unstable"


def test_stability_rejects_non_rest_point(capsys, files):
    _, game, prof = files
    code, _, err = run(capsys, "stability", game, "--profile", prof)
    assert code == 8 and error_of(err)["error"] == "not-rest-point"
    assert run(capsys, "stability", game, "--profile", prof, "--rest-tol", "1")[0] == 0


def test_stability_eigensolver_failure(capsys, files, monkeypatch):
    from seqdyn import stability
    from seqdyn.numerics import EigenSolverError

    def broken(_):
        raise EigenSolverError("no convergence")

    monkeypatch.setattr(stability, "eigenvalues", broken)
    tmp, game, _ = files
    prof = tmp / "deg.json"
    prof.write_text(json.dumps({"kind": "sequence", "1": {"": 1, "L1": 1}, "2": {"": 1, "l": 1}}))
    code, _, err = run(capsys, "stability", game, "--profile", prof)
    assert code == 6 and error_of(err)["error"] == "eigensolver"


# -- equiv --------------------------------------------------------------------

def test_equiv_verdicts(capsys, files):
    tmp, game, prof = files
    normal = tmp / "n.json"
    normal.write_text(json.dumps({"kind": "normal", "1": {"L1*": 1 / 3, "R1L2R3": 1 / 3, "R1R2R3": 1 / 3}, "2": {"l": 1}}))
    code, out, _ = run(capsys, "equiv", game, "--normal", normal, "--sequence", prof)
    assert code == 0 and json.loads(out)["equivalent"] is True
    normal.write_text(json.dumps({"kind": "normal", "1": {"L1*": 1}, "2": {"l": 1}}))
    code, out, _ = run(capsys, "equiv", game, "--normal", normal, "--sequence", prof)
    assert code == 1 and json.loads(out)["max_gap"] == pytest.approx(2 / 3)


def test_equiv_accepts_full_plans(capsys, files):
    tmp, game, prof = files
    normal = tmp / "n.json"
    normal.write_text(json.dumps({"kind": "normal", "1": {"L1L2R3": 1 / 3, "R1L2R3": 1 / 3, "R1R2R3": 1 / 3}, "2": {"l": 1}}))
    code, _, _ = run(capsys, "equiv", game, "--normal", normal, "--sequence", prof)
    assert code == 0


# -- bench --------------------------------------------------------------------

def test_bench_small(capsys):
    code, out, _ = run(capsys, "bench", "--depth", "1..3", "--trials", "1")
    assert code == 0
    table = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["depth"]) for r in table] == [1, 2, 3]
    assert [int(r["sequences_1"]) for r in table] == [5, 9, 13]
    assert [int(r["reduced_plans_1"]) for r in table] == [3, 7, 15]
    assert all(float(r["normal_step_seconds"]) > 0 for r in table)


@pytest.mark.parametrize("depth", ["0", "9", "x", "3..1"])
def test_bench_depth_range(capsys, depth):
    assert run(capsys, "bench", "--depth", depth)[0] == 2


def test_load_json_reports_decode_errors(tmp_path):
    f = tmp_path / "x.json"
    f.write_text("[1,")
    with pytest.raises(GameFormatError):
        load_json(f)
