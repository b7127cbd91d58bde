from __future__ import annotations

import random
from fractions import Fraction

import pytest

from atilde.boundary import (
    cocycle_check,
    cylinder,
    cylinder_measure,
    extend_along,
    in_convex_hull,
    m_vector,
    partition_check,
    refine_cylinder,
    rn_derivative,
    rn_exponent,
)
from atilde.counting import radial_ratio
from atilde.errors import DepthError, RangeError
from atilde.wordcore import build_ball


def test_cylinder_measures(G2):
    p = G2.geometry.of_dim(1)[0]
    assert cylinder_measure(cylinder(G2, (), ()), G2) == 1
    assert cylinder_measure(cylinder(G2, (), (p,)), G2) == Fraction(1, 7)
    x = (p,)
    assert cylinder_measure(cylinder(G2, x, x), G2) == 1


def test_partition(G2, ball2):
    rep = partition_check(G2, (), (1, 1), ball2)
    assert rep["ok"] and rep["count"] == 42 and rep["measure"] == Fraction(1, 42)
    assert partition_check(G2, (), (0, 0), ball2)["ok"]
    base = ball2.sphere((0, 1))[3]
    rep = partition_check(G2, base, (1, 0))
    assert rep["ok"] and rep["count"] == 7 and rep["total"] == 1


def test_refine_zero_is_identity(G2):
    c = cylinder(G2, (), G2.normal_words((1, 0))[0])
    assert refine_cylinder(G2, c, (0, 0)) == [c]


def test_refine_child_counts(G2, ball2):
    for target in ball2.sphere((1, 1))[:5]:
        c = cylinder(G2, (), target)
        kids = refine_cylinder(G2, c, (1, 1), ball2)
        assert len(kids) == radial_ratio((1, 1), (1, 1), 2, 2) == 16
        assert sum(cylinder_measure(k, G2) for k in kids) == cylinder_measure(c, G2)


def test_refine_additivity_exhaustive(G2, ball2):
    # every cylinder at depth <= 2 (so depth + 2 <= ball radius), delta = e_1 + e_n
    for w in ball2.words:
        if len(w) <= 2:
            c = cylinder(G2, (), w)
            kids = refine_cylinder(G2, c, (1, 1), ball2)
            assert sum(cylinder_measure(k, G2) for k in kids) == cylinder_measure(c, G2)
            assert all(in_convex_hull(G2, w, k.target) for k in kids)


def test_refine_needs_radius(G2):
    small = build_ball(G2, 1)
    c = cylinder(G2, (), ())
    with pytest.raises(RangeError):
        refine_cylinder(G2, c, (1, 1), small)


def test_m_vector_examples(G2):
    for i in (1, 2):
        for u in G2.geometry.of_dim(i):
            z = extend_along(G2, (), (u,), (2, 2))
            expected = tuple(-1 if j == i - 1 else 0 for j in range(2))
            assert m_vector(G2, (), (u,), z) == expected
            assert rn_derivative(G2, (), (u,), z) == 4
    z = extend_along(G2, (), (), (3, 3))
    assert m_vector(G2, z[:2], z[:2], z) == (0, 0)
    assert rn_derivative(G2, z[:1], z[:1], z) == 1


def test_depth_error_names_component(G2):
    u = G2.geometry.of_dim(1)[0]
    z = extend_along(G2, (), (), (3, 0))
    with pytest.raises(DepthError, match="component 2"):
        m_vector(G2, (), (u,), z)


def test_m_stable_under_deepening(G2):
    B = build_ball(G2, 2)
    rng = random.Random(3)
    for _ in range(25):
        x, y = rng.choice(B.words), rng.choice(B.words)
        z = extend_along(G2, x, x, (6, 6))
        ms = {m_vector(G2, x, y, z)}
        for _ in range(2):
            z = extend_along(G2, x, z, (1, 1))
            ms.add(m_vector(G2, x, y, z))
        assert len(ms) == 1


def test_antisymmetry(G2):
    B = build_ball(G2, 2)
    rng = random.Random(4)
    for _ in range(40):
        x, y = rng.choice(B.words), rng.choice(B.words)
        z = extend_along(G2, (), (), (9, 9))
        assert m_vector(G2, x, y, z) == tuple(-v for v in m_vector(G2, y, x, z))


def test_cocycle_small(G2):
    B = build_ball(G2, 1)
    z = extend_along(G2, (), (), (5, 5))
    z2 = extend_along(G2, (), z, (1, 1))
    rep = cocycle_check(G2, B.words, z, z2)
    assert rep["ok"] and rep["triples"] == 15**3
    assert all(e % 2 == 0 for e in rep["exponents"])


def test_rn_exponent_formula():
    assert rn_exponent((-1, 0), 2) == 2
    assert rn_exponent((0, -1), 2) == 2
    assert rn_exponent((1, -1, 0), 3) == -3 + 4


def test_rn_values_powers_of_q_even(G3, ball3):
    z = extend_along(G3, (), (), (5, 5))
    for y in ball3.words[:200]:
        v = rn_derivative(G3, (), y, z)
        e = 0
        while v.numerator % 3 == 0:
            v /= 3
            e += 1
        while v.denominator % 3 == 0:
            v *= 3
            e -= 1
        assert v == 1 and e % 2 == 0
