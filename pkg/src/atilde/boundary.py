"""Cylinder sets of the boundary, their measures and Radon-Nikodym values.

Boundary points are never built.  A cylinder Omega_y^x (boundary points whose
sector from y passes through x) is the pair (base y, target x); its measure
under nu_y is 1/|S_k| with k the shape of y^{-1} x.  Quantities that are
locally constant on the boundary are evaluated on a deep enough cylinder.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .counting import rn_weight, sphere_size
from .errors import ConsistencyError, DepthError, RangeError, UsageError
from .wordcore import CayleyBall, TriangleGroup, Word


@dataclass(frozen=True)
class CylinderSet:
    base: Word
    target: Word
    shape: tuple[int, ...]


def cylinder(G: TriangleGroup, base, target) -> CylinderSet:
    base, target = G.reduce(base), G.reduce(target)
    return CylinderSet(base, target, G.relative_shape(base, target))


def cylinder_measure(c: CylinderSet, G: TriangleGroup) -> Fraction:
    return Fraction(1, sphere_size(c.shape, G.n, G.q))


def _shape_words(G: TriangleGroup, k, ball: CayleyBall | None) -> list[Word]:
    if ball is None:
        return G.normal_words(k)
    return ball.sphere(k)


def in_convex_hull(G: TriangleGroup, y: Word, x: Word) -> bool:
    """True iff y lies in conv{1, x}, i.e. shape(y) + shape(y^{-1}x) = shape(x)."""
    a, b = G.shape(y), G.relative_shape(y, x)
    return tuple(i + j for i, j in zip(a, b)) == G.shape(x)


def refine_cylinder(
    G: TriangleGroup, c: CylinderSet, delta, ball: CayleyBall | None = None
) -> list[CylinderSet]:
    """Children Omega_base^{x1}, x1 in S_delta(target) cap S_{shape+delta}(base).

    Children are ordered by target word.  The words of shape delta come
    from the ball when one is given (range error if it is too small) and
    are enumerated directly otherwise.
    """
    delta = tuple(delta)
    if len(delta) != G.n or any(d < 0 for d in delta):
        raise UsageError(f"delta {delta} is not in Z_+^{G.n}")
    want = tuple(a + b for a, b in zip(c.shape, delta))
    kids = set()
    for t in _shape_words(G, delta, ball):
        x1 = G.multiply(c.target, t)
        if G.relative_shape(c.base, x1) == want:
            kids.add(x1)
    out = [CylinderSet(c.base, x1, want) for x1 in sorted(kids)]
    total = sum((cylinder_measure(k, G) for k in out), Fraction(0))
    if total != cylinder_measure(c, G):
        raise ConsistencyError(
            f"children of {c} have total measure {total}, parent has {cylinder_measure(c, G)}"
        )
    return out


def partition_check(G: TriangleGroup, base, k, ball: CayleyBall | None = None) -> dict:
    """Check that {Omega_base^x : x in S_k(base)} has total nu_base-measure 1."""
    base = G.reduce(base)
    k = tuple(k)
    targets = {G.multiply(base, t) for t in _shape_words(G, k, ball)}
    shapes_ok = all(G.relative_shape(base, x) == k for x in targets)
    size = sphere_size(k, G.n, G.q)
    measure = Fraction(1, size)
    total = measure * len(targets)
    return {
        "base": base,
        "k": k,
        "count": len(targets),
        "expected_count": size,
        "measure": measure,
        "total": total,
        "ok": shapes_ok and total == 1,
    }


def m_from_shapes(lx, ly, d: int) -> tuple[int, ...]:
    """m = ly - lx given the shapes of x^{-1}z and y^{-1}z and d = d(x, y)."""
    for i, v in enumerate(lx):
        if v < d:
            raise DepthError(
                f"component {i + 1} of shape(x^-1 z) is {v} < d(x,y) = {d}; choose a deeper z"
            )
    return tuple(b - a for a, b in zip(lx, ly))


def m_vector(G: TriangleGroup, x, y, z) -> tuple[int, ...]:
    """Displacement m(x, y; omega) for omega in the cylinder Omega_x^z."""
    x, y, z = G.reduce(x), G.reduce(y), G.reduce(z)
    return m_from_shapes(G.relative_shape(x, z), G.relative_shape(y, z), G.distance(x, y))


def rn_exponent(m, n: int) -> int:
    """The exponent e with d nu_y / d nu_x = q^e."""
    return -sum(rn_weight(n, i) * mi for i, mi in enumerate(m, start=1))


def rn_from_m(m, n: int, q: int) -> Fraction:
    return Fraction(q) ** rn_exponent(m, n)


def rn_derivative(G: TriangleGroup, x, y, z) -> Fraction:
    """d nu_y / d nu_x on the cylinder Omega_x^z."""
    return rn_from_m(m_vector(G, x, y, z), G.n, G.q)


def extend_along(G: TriangleGroup, base, target, delta) -> Word:
    """The first x1 in S_delta(target) with shape(base^{-1} x1) = shape + delta.

    Deterministic deepening of a cylinder, used to pick deep test cylinders.
    """
    base, target = G.reduce(base), G.reduce(target)
    want = tuple(a + b for a, b in zip(G.relative_shape(base, target), delta))
    for t in G.iter_normal_words(delta):
        x1 = G.multiply(target, t)
        if G.relative_shape(base, x1) == want:
            return x1
    raise ConsistencyError(f"cylinder ({base}, {target}) has no extension by {tuple(delta)}")


def cocycle_check(G: TriangleGroup, vertices, z, z2) -> dict:
    """Check RN(x,w) = RN(x,y) RN(y,w) over all ordered triples of vertices.

    RN(x, y) and RN(x, w) are evaluated with the cylinder through z and
    RN(y, w) with the deeper cylinder through z2, so the identity is not a
    formal telescoping of one set of shapes.
    """
    vs = [G.reduce(v) for v in vertices]
    z, z2 = G.reduce(z), G.reduce(z2)
    sh = [G.relative_shape(v, z) for v in vs]
    sh2 = [G.relative_shape(v, z2) for v in vs]
    dist = [[G.distance(a, b) for b in vs] for a in vs]
    n = G.n
    exps = set()
    checked = 0
    failures = []
    for i in range(len(vs)):
        for j in range(len(vs)):
            e_xy = rn_exponent(m_from_shapes(sh[i], sh[j], dist[i][j]), n)
            exps.add(e_xy)
            for k in range(len(vs)):
                e_xw = rn_exponent(m_from_shapes(sh[i], sh[k], dist[i][k]), n)
                e_yw = rn_exponent(m_from_shapes(sh2[j], sh2[k], dist[j][k]), n)
                checked += 1
                if e_xw != e_xy + e_yw and len(failures) < 10:
                    failures.append((vs[i], vs[j], vs[k]))
    return {"triples": checked, "failures": failures, "exponents": sorted(exps), "ok": not failures}


def require_radius(ball: CayleyBall, r: int, what: str) -> None:
    if ball.radius < r:
        raise RangeError(f"{what} needs a ball of radius {r}, got {ball.radius}")
