from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from atilde.counting import (
    freeness_bound,
    q_bracket,
    q_multinomial,
    radial_ratio,
    rn_weight,
    sphere_size,
    triangle_count,
    wall_triangle_count,
)
from atilde.errors import ConsistencyError, UsageError


def test_q_bracket():
    assert q_bracket(3, 2) == 21
    assert q_bracket(0, 5) == 1
    assert q_bracket(1, 3) == 2


def test_q_multinomial():
    assert q_multinomial((1, 2), 2) == 7
    assert q_multinomial((3,), 2) == 1


def test_sphere_size_examples():
    assert sphere_size((1, 0), 2, 2) == 7
    assert sphere_size((0, 0), 2, 2) == 1
    assert sphere_size((1, 1), 2, 2) == 42
    assert sphere_size((1,), 1, 2) == 3
    assert sphere_size((2,), 1, 2) == 6


@given(st.integers(0, 8), st.sampled_from([2, 3, 4, 5, 7]))
def test_tree_spheres(k, q):
    # the (q+1)-regular tree: (q+1) q^(k-1) vertices at distance k
    expected = 1 if k == 0 else (q + 1) * q ** (k - 1)
    assert sphere_size((k,), 1, q) == expected


@given(
    st.integers(1, 4).flatmap(
        lambda n: st.tuples(st.just(n), st.lists(st.integers(1, 3), min_size=n, max_size=n))
    ),
    st.sampled_from([2, 3, 4]),
)
def test_full_support_growth(nk, q):
    n, k = nk
    for i in range(n):
        bumped = list(k)
        bumped[i] += 1
        assert sphere_size(bumped, n, q) == sphere_size(k, n, q) * q ** rn_weight(n, i + 1)


def test_radial_ratio():
    assert radial_ratio((1, 1), (0, 0), 2, 2) == 1
    assert radial_ratio((1, 1), (1, 1), 2, 2) == 16
    r = radial_ratio((1, 1), (1, 0), 2, 2)
    assert r == Fraction(sphere_size((2, 1), 2, 2), 42)
    # support change: not a pure power of q
    assert radial_ratio((1, 0), (0, 1), 2, 2) == Fraction(42, 7)


def test_triangle_counts():
    assert triangle_count(1, 2) == 21
    assert triangle_count(2, 2) == 168
    assert triangle_count(1, 3) == 52
    with pytest.raises(UsageError):
        triangle_count(1, 2, n=3)
    with pytest.raises(UsageError):
        triangle_count(0, 2)


def test_freeness_bound():
    assert wall_triangle_count(1, 2) == 9
    assert freeness_bound(1, 2) == Fraction(3, 7)
    assert wall_triangle_count(2, 2) == 18
    assert freeness_bound(2, 2) == Fraction(3, 28)
    for q, m in itertools.product([2, 3, 4, 5], range(1, 8)):
        assert freeness_bound(m + 1, q) / freeness_bound(m, q) == Fraction(1, q * q)
        assert freeness_bound(m + 1, q) < freeness_bound(m, q)


def test_outputs_are_exact():
    assert isinstance(sphere_size((3, 2), 2, 7), int)
    assert isinstance(freeness_bound(5, 3), Fraction)
    big = sphere_size((40, 40), 2, 13)
    assert big == sphere_size((1, 1), 2, 13) * 13 ** (2 * 39 + 2 * 39)


def test_rn_weight_parity():
    for n in range(1, 11):
        weights = [rn_weight(n, i) for i in range(1, n + 1)]
        if n % 2 == 0:
            assert all(w % 2 == 0 for w in weights)
        else:
            assert any(w % 2 for w in weights)


def test_exact_division_guard():
    from atilde.counting import _exact_div

    with pytest.raises(ConsistencyError):
        _exact_div(7, 2)
