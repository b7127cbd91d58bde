from __future__ import annotations

import json
import re

import pytest

from atilde.cli import main
from atilde.tripres import save_presentation


@pytest.fixture()
def pres(tmp_path, P2):
    path = tmp_path / "p.json"
    save_presentation(P2, path)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_ratio_set(capsys):
    code, out, _ = run(capsys, "ratio-set", "--n", "2", "--q", "3")
    assert code == 0
    assert json.loads(out)["lambda"] == "1/9"


def test_sphere_census_zero(capsys):
    code, out, _ = run(capsys, "sphere", "census", "--n", "2", "--q", "2", "--max-norm", "0")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 1 and doc["rows"][0]["formula"] == 1


def test_sphere_census_matches(capsys, pres):
    code, out, _ = run(capsys, "sphere", "census", "--presentation", pres, "--max-norm", "4")
    doc = json.loads(out)
    assert code == 0 and doc["all_match"] and len(doc["rows"]) == 15


def test_search_and_validate(capsys, tmp_path):
    out_path = tmp_path / "found.json"
    code, out, _ = run(capsys, "tripres", "search", "--n", "2", "--q", "2", "--out", str(out_path))
    assert code == 0 and json.loads(out)["valid"] == [True]
    assert (tmp_path / "found.json.manifest.json").exists()
    code, out, _ = run(capsys, "tripres", "validate", "--presentation", str(out_path))
    assert code == 0 and json.loads(out)["valid"]


def test_validate_broken_presentation(capsys, tmp_path, P2):
    doc = P2.to_dict()
    doc["triples"] = doc["triples"][1:]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "tripres", "validate", "--presentation", str(path))
    assert code == 1 and "axioms" in err


def test_parse_error_exit(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    code, _, err = run(capsys, "tripres", "validate", "--presentation", str(path))
    assert code == 2 and "line" in err


def test_missing_flag_named(capsys):
    code, _, err = run(capsys, "ratio-set", "--n", "2")
    assert code == 2 and "--q" in err


def test_bad_subcommand(capsys):
    code, _, _ = run(capsys, "nonsense")
    assert code == 2


def test_ball_and_measure(capsys, tmp_path, pres):
    ball = tmp_path / "b.ball"
    code, out, _ = run(capsys, "ball", "build", "--presentation", pres, "--radius", "3", "--out", str(ball))
    assert code == 0 and json.loads(out)["per_radius"] == [1, 14, 98, 560]
    code, out, _ = run(capsys, "measure", "--presentation", pres, "--target", "g0")
    assert code == 0 and json.loads(out)["measure"] == "1/7"
    code, out, _ = run(capsys, "measure", "--presentation", pres, "--k", "1,1")
    assert code == 0 and json.loads(out)["count"] == 42
    code, out, _ = run(capsys, "triangles", "--presentation", pres, "--ball", str(ball), "--m", "3")
    assert code == 0 and json.loads(out)["enumerated"] == 1344
    code, _, err = run(capsys, "triangles", "--presentation", pres, "--ball", str(ball), "--m", "2",
                       "--method", "project")
    assert code == 2 and "radius" in err


def test_rn(capsys, pres):
    code, out, _ = run(capsys, "rn", "--presentation", pres, "--y", "g0", "--z", "g0,g7")
    assert code == 0 and json.loads(out)["rn"] == "4/1"
    code, _, err = run(capsys, "rn", "--presentation", pres, "--y", "g0", "--z", "g0")
    assert code == 2 and "deeper" in err
    code, out, _ = run(capsys, "rn", "--presentation", pres, "--census")
    assert code == 0 and json.loads(out)["generators_ok"]


def test_phi_and_witnesses(capsys, pres):
    code, out, _ = run(capsys, "phi", "--presentation", pres, "--x", "g0", "--y", "g1", "--levels", "1")
    doc = json.loads(out)
    assert code == 0 and doc["pieces"] == 24 and doc["covered"] == "1/64"
    code, out, _ = run(capsys, "witnesses", "--presentation", pres, "--k", "0,0", "--levels", "1")
    assert code == 0 and json.loads(out)["pairs"] == 1


def test_classify_descriptor(capsys):
    code, out, _ = run(capsys, "classify", "--n", "3", "--q", "2")
    assert code == 0 and json.loads(out)["lambda"] == "1/2"


def test_freeness(capsys):
    code, out, _ = run(capsys, "freeness-bound", "--q", "2", "--m", "4")
    doc = json.loads(out)
    assert code == 0 and doc["rows"][0]["bound"] == "3/7" and doc["rows"][1]["bound"] == "3/28"


def test_determinism_and_manifest(capsys, tmp_path, pres):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(capsys, "sphere", "census", "--presentation", pres, "--max-norm", "3",
                   "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    ma = json.loads((tmp_path / "a.json.manifest.json").read_text())
    assert set(ma) >= {"command", "inputs", "versions", "seed"}
    assert "milliseconds" not in ma
    assert len(ma["inputs"]["presentation"]) == 64


def test_no_floats_in_reports(capsys, pres):
    _, out, _ = run(capsys, "phi", "--presentation", pres, "--x", "g0", "--y", "g1", "--levels", "1")
    assert not re.search(r"\d\.\d", out)
