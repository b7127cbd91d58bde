from __future__ import annotations

import json

import pytest

from atilde.errors import ParseError, UsageError
from atilde.pgeom import Duality, VectorGeometry, annihilator_duality, validate_duality
from atilde.tripres import (
    TrianglePresentation,
    cyclic_dualities,
    find_presentation,
    load_presentation,
    presentation_from_dict,
    save_presentation,
    search_presentations,
    validate_presentation,
)


def test_searched_presentation_is_valid(P2):
    rep = validate_presentation(P2)
    assert rep.valid
    for i in range(1, 6):
        assert rep.axioms[i].ok, i
    assert validate_duality(P2.lam, P2.geometry).valid


def test_presentation_closure(P2):
    lam, T = P2.lam, P2.triples
    for u, v, w in T:
        assert (v, w, u) in T
        assert (lam(w), lam(v), lam(u)) in T


def test_triple_count(P2):
    # one triple per ordered pair (u, v) with lam(u), v distinct and incident
    G, lam = P2.geometry, P2.lam
    pairs = [(u, v) for u in range(G.size) for v in range(G.size) if lam(u) != v and G.incident(lam(u), v)]
    assert len(P2.triples) == len(pairs) == 42


def test_conflicting_triples_break_axiom_three(P2):
    t = min(P2.triples)
    other = next(w for w in range(P2.geometry.size) if w != t[2])
    bad = TrianglePresentation(P2.geometry, P2.lam, P2.triples | {(t[0], t[1], other)})
    rep = validate_presentation(bad)
    assert not rep.axioms[3].ok
    assert rep.axioms[3].witnesses


def test_empty_presentation_fails_axiom_one():
    G = VectorGeometry(2, 2)
    rep = validate_presentation(TrianglePresentation(G, annihilator_duality(G), frozenset()))
    assert not rep.axioms[1].ok and rep.axioms[1].witnesses
    assert not rep.valid


def test_limit_zero():
    G = VectorGeometry(2, 2)
    assert search_presentations(G, annihilator_duality(G), limit=0) == []


def test_invalid_lambda_rejected():
    G = VectorGeometry(2, 2)
    with pytest.raises(UsageError):
        search_presentations(G, Duality(tuple(range(G.size))))


def test_annihilator_search_exhausts_without_result():
    G = VectorGeometry(2, 2)
    stats = {}
    assert search_presentations(G, annihilator_duality(G), stats=stats) == []
    assert stats["exhausted"] and stats["found"] == 0


@pytest.mark.parametrize("q", [2, 3, 4])
def test_cyclic_dualities_valid(q):
    G = VectorGeometry(2, q)
    lams = cyclic_dualities(G)
    assert lams
    for lam in lams:
        assert validate_duality(lam, G).valid


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_find_presentation(q):
    stats = {}
    found = find_presentation(VectorGeometry(2, q), stats=stats)
    assert found and validate_presentation(found[0]).valid
    assert stats["dualities_tried"] >= 1


def test_search_deterministic():
    G = VectorGeometry(2, 2)
    a = find_presentation(G, limit=3, seed=5)
    b = find_presentation(G, limit=3, seed=5)
    assert [p.digest() for p in a] == [p.digest() for p in b]
    assert all(validate_presentation(p).valid for p in a)


def test_round_trip(tmp_path, P2):
    path = tmp_path / "p.json"
    save_presentation(P2, path, {"seed": 0})
    back = load_presentation(path)
    assert back.triples == P2.triples and back.lam == P2.lam
    assert back.digest() == P2.digest()
    assert validate_presentation(back).valid
    save_presentation(back, tmp_path / "q.json", {"seed": 0})
    assert (tmp_path / "q.json").read_bytes() == path.read_bytes()


def test_parse_errors(tmp_path, P2):
    doc = P2.to_dict()
    doc["triples"][0] = [0, 1, 99]
    with pytest.raises(ParseError, match="triples"):
        presentation_from_dict(doc)
    doc = P2.to_dict()
    del doc["lambda"]
    with pytest.raises(ParseError, match="lambda"):
        presentation_from_dict(doc)
    bad = tmp_path / "bad.json"
    bad.write_text('{"geometry": \n[')
    with pytest.raises(ParseError, match="line"):
        load_presentation(bad)


def test_declared_geometry_loads(tmp_path, P2):
    doc = P2.to_dict()
    assert doc["geometry"] == {"kind": "vector", "n": 2, "q": 2}
    (tmp_path / "p.json").write_text(json.dumps(doc))
    assert validate_presentation(load_presentation(tmp_path / "p.json")).valid
