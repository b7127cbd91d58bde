from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from atilde.counting import rn_weight, triangle_count
from atilde.dynamics import (
    classify,
    generator_rn_census,
    kernel_reduce,
    phi_construct,
    ratio_descriptor,
    transitivity_witnesses,
    triangle_census,
    verify_pieces,
)
from atilde.errors import RangeError
from atilde.wordcore import build_ball


@pytest.mark.parametrize("n", range(1, 11))
def test_ratio_descriptor(n):
    d = ratio_descriptor(n, 3)
    assert d.exponents == tuple(i * (n + 1 - i) for i in range(1, n + 1))
    assert d.g == math.gcd(*d.exponents) == (1 if n % 2 else 2)
    assert d.lam == Fraction(1, 3**d.g)
    assert Fraction(9 if n % 2 == 0 else 3) in d.ratio_set()


def test_ratio_descriptor_examples():
    assert ratio_descriptor(2, 2).exponents == (2, 2)
    assert ratio_descriptor(3, 2).exponents == (3, 4, 3)
    assert ratio_descriptor(1, 2).lam == Fraction(1, 2)


def test_generator_census(G2, ball2):
    c = generator_rn_census(G2, ball2)
    assert c["generators_ok"]
    assert [r["values"] for r in c["generators"]] == [[4], [4]]
    assert 0 in c["exponents"]
    assert all(e % 2 == 0 for e in c["exponents"])
    assert math.gcd(*c["exponents"]) == 2


def test_census_needs_radius(G2):
    with pytest.raises(RangeError):
        generator_rn_census(G2, build_ball(G2, 2))


def test_kernel_matches_reference(G2, G3):
    rng = random.Random(11)
    for G in (G2, G3):
        words = [tuple(rng.randrange(G.size) for _ in range(12)) for _ in range(300)]
        assert kernel_reduce(G, words) == [G.reduce(w) for w in words]


def test_phi_one_level(G2):
    x, y = G2.normal_words((1, 0))[:2]
    pm = phi_construct(G2, x, y, levels=1)
    assert pm.ok and pm.K == 64
    assert len(pm) == 24
    assert pm.covered == pm.expected_coverage == Fraction(1, 64)
    assert pm.measure_preserving and pm.source_measure == pm.target_measure
    assert verify_pieces(G2, pm)["ok"]


def test_phi_coverage_formula(G2):
    x, y = G2.normal_words((1, 0))[2:4]
    pm = phi_construct(G2, x, y, levels=2, threads=2)
    assert pm.ok
    assert pm.expected_coverage == 1 - (1 - Fraction(1, pm.K)) ** 2
    assert pm.covered == pm.expected_coverage
    assert verify_pieces(G2, pm, stride=7)["ok"]


def test_phi_identity_pair(G2):
    x = G2.normal_words((1, 0))[0]
    pm = phi_construct(G2, x, x, levels=1)
    assert pm.ok
    assert all(pm.piece(i)[1] == () for i in range(len(pm)))
    assert all(pm.piece(i)[0] == pm.piece(i)[2] for i in range(len(pm)))


def test_phi_different_shapes(G2):
    x = G2.normal_words((1, 0))[0]
    y = G2.normal_words((0, 1))[0]
    pm = phi_construct(G2, x, y, levels=1)
    assert pm.ok
    assert verify_pieces(G2, pm)["ok"]


def test_phi_q3(G3):
    x, y = G3.normal_words((1, 0))[:2]
    pm = phi_construct(G3, x, y, levels=1)
    assert pm.ok and pm.covered == Fraction(1, pm.K)
    assert verify_pieces(G3, pm, stride=3)["ok"]


def test_witnesses_trivial(G2):
    rep = transitivity_witnesses(G2, (0, 0), levels=1)
    assert rep["pairs"] == 1 and rep["ok"]


def test_classify_descriptor_only():
    cert = classify(n=3, q=2)
    assert cert["status"] == "PASSED" and cert["lambda"] == Fraction(1, 2)
    assert cert["mode"] == "descriptor-only"


def test_classify_full(G2, ball2):
    cert = classify(G2, ball2, levels=1)
    assert cert["status"] == "PASSED"
    assert cert["lambda"] == Fraction(1, 4)
    assert set(cert["sections"]) == {"a", "b", "c", "d"}
    assert cert["sections"]["c"]["pairs"] == 42
    assert "finite-depth" in cert["scope"]


def test_classify_tampered(G2, ball2):
    census = generator_rn_census(G2, ball2)
    census = dict(census, exponents=census["exponents"] + [3])
    cert = classify(G2, ball2, census=census, witness_shape=(0, 0), levels=1)
    assert cert["status"] == "FAILED"
    assert cert["sections"]["b"]["violations"] == [3]


@pytest.mark.parametrize("m", [1, 2, 3])
def test_triangle_census_q2(G2, ball2, m):
    assert triangle_census(G2, ball2, m) == triangle_count(m, 2)


def test_triangle_census_projection(G2, ball2):
    assert triangle_census(G2, ball2, 1, method="project") == 21
    assert triangle_census(G2, ball2, 2, method="project") == 168


def test_triangle_census_q3(G3, ball3):
    assert triangle_census(G3, ball3, 2) == 1404


def test_triangle_census_radius(G2):
    with pytest.raises(RangeError):
        triangle_census(G2, build_ball(G2, 1), 2)


def test_parity_invariant_symbolic():
    for n in range(2, 11, 2):
        assert all(rn_weight(n, i) % 2 == 0 for i in range(1, n + 1))
