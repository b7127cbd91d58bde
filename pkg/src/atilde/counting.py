"""Exact closed-form counts: q-analogs, sphere sizes, triangle census.

Everything here is integer or Fraction arithmetic; nothing touches floats.
"""

from __future__ import annotations

from fractions import Fraction
from math import prod

from .errors import ConsistencyError, UsageError


def q_bracket(k: int, q: int) -> int:
    """(q^k - 1)(q^{k-1} - 1)...(q - 1); the empty product for k = 0."""
    if k < 0:
        raise UsageError("k must be non-negative")
    return prod(q**i - 1 for i in range(1, k + 1))


def _exact_div(a: int, b: int) -> int:
    d, r = divmod(a, b)
    if r:
        raise ConsistencyError(f"{a} is not divisible by {b}")
    return d


def q_multinomial(parts, q: int) -> int:
    parts = list(parts)
    if any(p < 0 for p in parts):
        raise UsageError("parts must be non-negative")
    return _exact_div(q_bracket(sum(parts), q), prod(q_bracket(p, q) for p in parts))


def gaussian_binomial(m: int, r: int, q: int) -> int:
    """Number of r-dimensional subspaces of F_q^m."""
    if not 0 <= r <= m:
        return 0
    return q_multinomial((r, m - r), q)


def rn_weight(n: int, i: int) -> int:
    """i(n+1-i), the exponent weight of coordinate i (1-based)."""
    return i * (n + 1 - i)


def sphere_size(k, n: int, q: int) -> int:
    """|S_k| in a building of type A~_n and order q."""
    k = tuple(k)
    if len(k) != n or any(x < 0 for x in k):
        raise UsageError(f"sphere index {k} is not in Z_+^{n}")
    support = [i + 1 for i, x in enumerate(k) if x]
    j = [0] + support + [n + 1]
    t = len(support)
    shift = sum(j[v] * (j[v + 1] - j[v]) for v in range(1, t + 1))
    mult = q_multinomial([j[v + 1] - j[v] for v in range(t + 1)], q)
    growth = sum(rn_weight(n, i) * k[i - 1] for i in range(1, n + 1))
    return _exact_div(mult * q**growth, q**shift)


def radial_ratio(k, delta, n: int, q: int) -> Fraction:
    """|S_{k+delta}| / |S_k|."""
    top = tuple(a + b for a, b in zip(k, delta))
    return Fraction(sphere_size(top, n, q), sphere_size(k, n, q))


def _check_m(m: int) -> None:
    if m < 1:
        raise UsageError("triangle size m must be at least 1")


def triangle_count(m: int, q: int, n: int = 2) -> int:
    """Number of apex triangles of size m at a vertex of an A~_2 building."""
    if n != 2:
        raise UsageError("the triangle census is only defined for n = 2")
    _check_m(m)
    return (q * q + q + 1) * (q + 1) * q ** (3 * m - 3)


def wall_triangle_count(m: int, q: int) -> int:
    """Number of apex triangles of size m lying in an apartment with a fixed wall."""
    _check_m(m)
    return 3 * (q + 1) * q ** (m - 1)


def freeness_bound(m: int, q: int) -> Fraction:
    """Upper bound on the measure of wall-compatible boundary points at size m."""
    return Fraction(wall_triangle_count(m, q), triangle_count(m, q))
