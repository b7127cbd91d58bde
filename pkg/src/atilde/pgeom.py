"""Finite fields and finite projective geometries.

The projective geometry PG(n, q) is modelled by the subspaces of F_q^{n+1};
a subspace of vector dimension d has ``dim`` d, so points have dim 1 and
hyperplanes dim n.  Every subspace is stored as a reduced row echelon basis,
which makes equality and hashing representation equality.

All modules refer to elements of the geometry through a dense global index
(sorted by dim, then lexicographically by basis).  Geometries expose the
same small index-level interface whether they come from a vector space or
from an explicit incidence table of a projective plane.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .errors import ConfigurationError, ConsistencyError, UsageError

# Irreducible polynomials for the non-prime orders, lowest coefficient first.
MODULI = {
    4: (2, (1, 1, 1)),
    8: (2, (1, 1, 0, 1)),
    9: (3, (1, 0, 1)),
}
PRIMES = (2, 3, 5, 7, 11, 13)
SUPPORTED_ORDERS = tuple(sorted(PRIMES + tuple(MODULI)))


class _Whole:
    """The join value when two subspaces span the whole geometry."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Whole"

    def __reduce__(self):
        return (_Whole, ())


WHOLE = _Whole()


class FiniteField:
    """Arithmetic in F_q by lookup tables; elements are the ints 0..q-1.

    For q = p^e the int c encodes the polynomial sum(c_i x^i) whose base-p
    digits are c_0, c_1, ...
    """

    def __init__(self, q: int):
        if q in PRIMES:
            self.p, self.modulus = q, None
        elif q in MODULI:
            self.p, self.modulus = MODULI[q]
        else:
            raise ConfigurationError(
                f"unsupported field order q={q}; supported: {SUPPORTED_ORDERS}"
            )
        self.q = q
        if self.modulus is None:
            self.add = [[(a + b) % q for b in range(q)] for a in range(q)]
            self.mul = [[(a * b) % q for b in range(q)] for a in range(q)]
        else:
            digits = [self._digits(a) for a in range(q)]
            self.add = [
                [self._number([(x + y) % self.p for x, y in zip(da, db)]) for db in digits]
                for da in digits
            ]
            self.mul = [[self._polymul(da, db) for db in digits] for da in digits]
        self.neg = [self.add[a].index(0) for a in range(q)]
        self.inv = [None] + [self.mul[a].index(1) for a in range(1, q)]

    @property
    def degree(self) -> int:
        return 1 if self.modulus is None else len(self.modulus) - 1

    def _digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.degree):
            out.append(a % self.p)
            a //= self.p
        return out

    def _number(self, digits) -> int:
        return sum(d * self.p**i for i, d in enumerate(digits))

    def _polymul(self, da, db) -> int:
        p, mod = self.p, self.modulus
        e = len(mod) - 1
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(da):
            for j, y in enumerate(db):
                prod[i + j] = (prod[i + j] + x * y) % p
        # reduce by the monic modulus from the top degree down
        for deg in range(len(prod) - 1, e - 1, -1):
            c = prod[deg]
            if c:
                for i in range(e + 1):
                    prod[deg - e + i] = (prod[deg - e + i] - c * mod[i]) % p
        return self._number(prod[:e])

    def __repr__(self) -> str:
        return f"FiniteField({self.q})"


_FIELDS: dict[int, FiniteField] = {}


def field(q: int) -> FiniteField:
    if q not in _FIELDS:
        _FIELDS[q] = FiniteField(q)
    return _FIELDS[q]


def rref(rows, F: FiniteField) -> tuple[tuple[int, ...], ...]:
    """Reduced row echelon form with leading ones; zero rows dropped."""
    m = [list(r) for r in rows]
    if not m:
        return ()
    ncols = len(m[0])
    add, mul, neg, inv = F.add, F.mul, F.neg, F.inv
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        s = inv[m[r][c]]
        m[r] = [mul[s][x] for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = neg[m[i][c]]
                m[i] = [add[x][mul[f][y]] for x, y in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return tuple(tuple(row) for row in m[:r])


@dataclass(frozen=True, order=True)
class ProjSubspace:
    """A subspace of F_q^{n+1}; ``basis`` is its canonical echelon form."""

    n: int
    q: int
    basis: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def span(cls, n: int, q: int, rows) -> "ProjSubspace":
        return cls(n, q, rref(rows, field(q)))


def _same_geometry(u: ProjSubspace, v: ProjSubspace) -> None:
    if (u.n, u.q) != (v.n, v.q):
        raise UsageError(f"subspaces of PG({u.n},{u.q}) and PG({v.n},{v.q}) are not comparable")


def _rank(rows, q: int) -> int:
    return len(rref(rows, field(q)))


def incident(u: ProjSubspace, v: ProjSubspace) -> bool:
    """True iff one of u, v contains the other."""
    _same_geometry(u, v)
    return _rank(u.basis + v.basis, u.q) == max(u.dim, v.dim)


def join(u: ProjSubspace, v: ProjSubspace):
    """Span of u and v, or WHOLE when it is all of F_q^{n+1}."""
    _same_geometry(u, v)
    s = ProjSubspace.span(u.n, u.q, u.basis + v.basis)
    return WHOLE if s.dim == u.n + 1 else s


def annihilator(u: ProjSubspace) -> ProjSubspace:
    """Orthogonal complement under the standard dot product."""
    F = field(u.q)
    n1 = u.n + 1
    pivots = [row.index(1) for row in u.basis]
    free = [c for c in range(n1) if c not in pivots]
    rows = []
    for f in free:
        vec = [0] * n1
        vec[f] = 1
        for row, p in zip(u.basis, pivots):
            vec[p] = F.neg[row[f]]
        rows.append(vec)
    return ProjSubspace.span(u.n, u.q, rows)


def enumerate_subspaces(n: int, q: int, d: int) -> list[ProjSubspace]:
    """All subspaces of dim d in PG(n, q), sorted by basis."""
    if not 1 <= d <= n:
        raise UsageError(f"dimension {d} outside 1..{n}")
    field(q)  # raises ConfigurationError for unsupported q
    n1 = n + 1
    out = []
    for pivots in itertools.combinations(range(n1), d):
        slots = [(i, c) for i, p in enumerate(pivots) for c in range(p + 1, n1) if c not in pivots]
        for values in itertools.product(range(q), repeat=len(slots)):
            rows = [[0] * n1 for _ in range(d)]
            for i, p in enumerate(pivots):
                rows[i][p] = 1
            for (i, c), val in zip(slots, values):
                rows[i][c] = val
            out.append(ProjSubspace(n, q, tuple(tuple(r) for r in rows)))
    out.sort()
    return out


def count_incident(n: int, q: int, b_dim: int, r: int) -> int:
    """Number of r-dim subspaces containing (r >= b_dim) or contained in
    (r < b_dim) a fixed b_dim-dim subspace of PG(n, q).  b_dim = 0 is the
    zero subspace, so count_incident(n, q, 0, r) = |Pi_r|."""
    from .counting import gaussian_binomial

    if not (0 <= b_dim <= n + 1 and 0 <= r <= n + 1):
        raise UsageError("dimensions out of range")
    if r >= b_dim:
        return gaussian_binomial(n + 1 - b_dim, r - b_dim, q)
    return gaussian_binomial(b_dim, r, q)


class Geometry:
    """Index-level view of a projective geometry.

    Subclasses fill ``dims`` and implement ``_join``; incidence and joins are
    served from tables built on first use.
    """

    n: int
    q: int
    dims: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.dims)

    def dim(self, i: int) -> int:
        return self.dims[i]

    def of_dim(self, d: int) -> list[int]:
        return [i for i, di in enumerate(self.dims) if di == d]

    @cached_property
    def join_table(self) -> list[list]:
        return [[self._join(i, j) for j in range(self.size)] for i in range(self.size)]

    def join(self, i: int, j: int):
        return self.join_table[i][j]

    def spans_whole(self, i: int, j: int) -> bool:
        return self.join_table[i][j] is WHOLE

    @cached_property
    def incidence(self) -> list[list[bool]]:
        jt = self.join_table
        return [[jt[i][j] == i or jt[i][j] == j for j in range(self.size)] for i in range(self.size)]

    def incident(self, i: int, j: int) -> bool:
        return self.incidence[i][j]

    def contains(self, big: int, small: int) -> bool:
        return self.dims[big] >= self.dims[small] and self.incidence[big][small]

    def flags(self) -> list[tuple[int, ...]]:
        """Complete flags u_1 < u_2 < ... < u_n, in index order."""
        flags = [(u,) for u in self.of_dim(1)]
        for d in range(2, self.n + 1):
            layer = self.of_dim(d)
            flags = [f + (u,) for f in flags for u in layer if self.contains(u, f[-1])]
        return flags

    def to_spec(self) -> dict:
        raise NotImplementedError


class VectorGeometry(Geometry):
    """PG(n, q) built from the subspaces of F_q^{n+1}."""

    def __init__(self, n: int, q: int):
        if n < 1:
            raise UsageError("rank n must be at least 1")
        self.n, self.q = n, q
        self.field = field(q)
        self.elements: list[ProjSubspace] = []
        for d in range(1, n + 1):
            self.elements.extend(enumerate_subspaces(n, q, d))
        self.dims = tuple(u.dim for u in self.elements)
        self.index = {u: i for i, u in enumerate(self.elements)}

    def subspace(self, i: int) -> ProjSubspace:
        return self.elements[i]

    def index_of(self, u: ProjSubspace) -> int:
        return self.index[u]

    def _join(self, i: int, j: int):
        s = join(self.elements[i], self.elements[j])
        return s if s is WHOLE else self.index[s]

    def to_spec(self) -> dict:
        return {"kind": "vector", "n": self.n, "q": self.q}

    def __repr__(self) -> str:
        return f"PG({self.n},{self.q})"


class AbstractPlane(Geometry):
    """A projective plane given by an incidence table.

    Points get indices 0..P-1 and lines P..P+L-1; ``matrix[p][l]`` is true
    when point p lies on line l.
    """

    def __init__(self, matrix):
        self.matrix = tuple(tuple(bool(x) for x in row) for row in matrix)
        self.points = len(self.matrix)
        self.lines = len(self.matrix[0]) if self.matrix else 0
        self.n = 2
        per_line = sum(row[0] for row in self.matrix) if self.lines else 0
        self.q = per_line - 1
        self.dims = (1,) * self.points + (2,) * self.lines
        self._on = [
            {self.points + l for l in range(self.lines) if self.matrix[p][l]} for p in range(self.points)
        ]

    def validate(self) -> list[str]:
        """Plane axioms; returns a list of violations (empty when valid)."""
        problems = []
        P, L, M = self.points, self.lines, self.matrix
        for l in range(L):
            k = sum(M[p][l] for p in range(P))
            if k != self.q + 1:
                problems.append(f"line {l} has {k} points, expected {self.q + 1}")
        for a, b in itertools.combinations(range(P), 2):
            k = sum(M[a][l] and M[b][l] for l in range(L))
            if k != 1:
                problems.append(f"points {a},{b} lie on {k} common lines")
        for a, b in itertools.combinations(range(L), 2):
            k = sum(M[p][a] and M[p][b] for p in range(P))
            if k != 1:
                problems.append(f"lines {a},{b} meet in {k} points")
        return problems

    def _join(self, i: int, j: int):
        if i == j:
            return i
        P = self.points
        if i < P and j < P:
            return next(iter(self._on[i] & self._on[j]))
        if i >= P and j >= P:
            return WHOLE
        p, l = (i, j) if i < P else (j, i)
        return l if l in self._on[p] else WHOLE

    def to_spec(self) -> dict:
        return {
            "kind": "incidence",
            "points": self.points,
            "lines": self.lines,
            "matrix": [[int(x) for x in row] for row in self.matrix],
        }

    def __repr__(self) -> str:
        return f"AbstractPlane(points={self.points}, q={self.q})"


def plane_incidence_table(q: int) -> list[list[int]]:
    """Point-line incidence matrix of PG(2, q)."""
    G = VectorGeometry(2, q)
    pts, lns = G.of_dim(1), G.of_dim(2)
    return [[int(G.incident(p, l)) for l in lns] for p in pts]


def geometry_from_spec(spec: dict) -> Geometry:
    kind = spec.get("kind")
    if kind == "vector":
        return VectorGeometry(int(spec["n"]), int(spec["q"]))
    if kind == "incidence":
        matrix = spec["matrix"]
        if len(matrix) != spec["points"] or any(len(r) != spec["lines"] for r in matrix):
            raise UsageError("incidence matrix shape does not match declared points/lines")
        plane = AbstractPlane(matrix)
        problems = plane.validate()
        if problems:
            raise UsageError("invalid projective plane: " + "; ".join(problems[:3]))
        return plane
    raise UsageError(f"unknown geometry kind {kind!r}")


@dataclass(frozen=True)
class Duality:
    """An involution of the geometry; ``map[i]`` is the image of element i."""

    map: tuple[int, ...]

    def __call__(self, i: int) -> int:
        return self.map[i]


@dataclass
class DualityReport:
    involutive: bool
    dimension_rule: bool
    violations: list[str]
    # informational only: not part of validity
    incidence_reversing: bool

    @property
    def valid(self) -> bool:
        return self.involutive and self.dimension_rule


def validate_duality(lam: Duality, G: Geometry) -> DualityReport:
    violations = []
    if len(lam.map) != G.size or any(not 0 <= x < G.size for x in lam.map):
        return DualityReport(False, False, ["map is not total on the geometry"], False)
    involutive = dim_ok = True
    for u in range(G.size):
        if lam.map[lam.map[u]] != u:
            involutive = False
            violations.append(f"lambda(lambda({u})) = {lam.map[lam.map[u]]}")
        expected = (G.n + 1 - G.dims[u]) % (G.n + 1)
        if G.dims[lam.map[u]] != expected:
            dim_ok = False
            violations.append(f"dim(lambda({u})) = {G.dims[lam.map[u]]}, expected {expected}")
    reversing = all(
        G.incident(u, v) == G.incident(lam.map[v], lam.map[u]) for u in range(G.size) for v in range(G.size)
    )
    return DualityReport(involutive, dim_ok, violations, reversing)


def annihilator_duality(G: VectorGeometry) -> Duality:
    return Duality(tuple(G.index_of(annihilator(u)) for u in G.elements))


def twisted_annihilator(G: VectorGeometry, matrix) -> Duality:
    """Plane involution sending each point p to the line (g p)^perp and each
    line back to its preimage point."""
    if G.n != 2:
        raise UsageError("twisted dualities are only built for planes")
    F = G.field
    lam = [None] * G.size
    for p in G.of_dim(1):
        (vec,) = G.elements[p].basis
        img = [0, 0, 0]
        for r in range(3):
            acc = 0
            for c in range(3):
                acc = F.add[acc][F.mul[matrix[r][c]][vec[c]]]
            img[r] = acc
        line = G.index_of(annihilator(ProjSubspace.span(2, G.q, [img])))
        lam[p], lam[line] = line, p
    return Duality(tuple(lam))


def general_linear(q: int, size: int = 3):
    """Invertible size x size matrices over F_q in lexicographic order."""
    F = field(q)
    for entries in itertools.product(range(q), repeat=size * size):
        m = [entries[i * size:(i + 1) * size] for i in range(size)]
        if len(rref(m, F)) == size:
            yield m


def singer_labeling(G: VectorGeometry) -> list[int]:
    """Point indices of PG(2, q) listed along a Singer cycle.

    Returns pts with pts[i] the point spanned by x^i in F_q[x]/(f) for the
    first cubic f (lexicographic coefficients) whose root generates all
    q^2+q+1 points.  Under this labelling every line is a translate of one
    planar difference set.
    """
    if G.n != 2:
        raise UsageError("Singer labelling is implemented for planes only")
    F, q = G.field, G.q
    N = q * q + q + 1
    for a, b, c in itertools.product(range(q), repeat=3):
        if c == 0:
            continue
        vec, pts, seen = (1, 0, 0), [], set()
        for _ in range(N):
            p = G.index_of(ProjSubspace.span(2, q, [vec]))
            if p in seen:
                break
            seen.add(p)
            pts.append(p)
            v0, v1, v2 = vec
            # multiply by x modulo x^3 - a x^2 - b x - c
            vec = (F.mul[c][v2], F.add[v0][F.mul[b][v2]], F.add[v1][F.mul[a][v2]])
        else:
            return pts
    raise ConsistencyError(f"no Singer cycle found for q={q}")
