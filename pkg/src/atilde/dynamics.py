"""Ratio sets, type classification, piecewise full-group maps, triangle census.

The ratio set of the boundary action is generated by the Radon-Nikodym
exponents i(n+1-i), so its arithmetic is exact and closed form.  The
finite-depth evidence (generator census, transitivity witnesses) is built
from explicit words and cylinders.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels as K_
from .boundary import (
    cylinder,
    extend_along,
    in_convex_hull,
    m_vector,
    refine_cylinder,
    require_radius,
    rn_derivative,
    rn_exponent,
)
from .counting import rn_weight, sphere_size
from .errors import ConsistencyError, UsageError
from .wordcore import CayleyBall, TriangleGroup, Word


# -- ratio set ---------------------------------------------------------------


@dataclass(frozen=True)
class RatioSetDescriptor:
    n: int
    q: int
    exponents: tuple[int, ...]
    g: int
    lam: Fraction

    def ratio_set(self, span: int = 2) -> list[Fraction]:
        """The elements q^{g m}, |m| <= span, of the ratio set (0 omitted)."""
        return [Fraction(self.q) ** (self.g * m) for m in range(-span, span + 1)]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "q": self.q,
            "exponents": list(self.exponents),
            "gcd": self.g,
            "lambda": self.lam,
            "ratio_set": f"{{0}} u {{{self.q}^({self.g}m) : m in Z}}",
        }


def ratio_descriptor(n: int, q: int) -> RatioSetDescriptor:
    if n < 1:
        raise UsageError("n must be at least 1")
    if q < 2:
        raise UsageError("q must be at least 2")
    exps = tuple(rn_weight(n, i) for i in range(1, n + 1))
    g = math.gcd(*exps)
    expected = 1 if n % 2 else 2
    if g != expected:
        raise ConsistencyError(f"gcd of exponents for n={n} is {g}, expected {expected}")
    return RatioSetDescriptor(n, q, exps, g, Fraction(1, q**g))


# -- Radon-Nikodym census ----------------------------------------------------


def generator_rn_census(G: TriangleGroup, ball: CayleyBall, depth: int = 2) -> dict:
    """RN values of generators on deep cylinders, and attained exponents.

    For each generator u of dim i the cylinder Omega_1^z with z extending u
    by depth in every coordinate must give d nu_u / d nu_1 = q^{i(n+1-i)}.
    The exponent scan takes every element y of the radius-2 ball against a
    deep cylinder through each vertex of that ball.
    """
    require_radius(ball, depth + 1, "generator census")
    n, q = G.n, G.q
    rows = []
    for i in range(1, n + 1):
        expected = Fraction(q) ** rn_weight(n, i)
        values = set()
        for u in G.geometry.of_dim(i):
            z = extend_along(G, (), (u,), (depth,) * n)
            values.add(rn_derivative(G, (), (u,), z))
        rows.append({"dim": i, "expected": expected, "values": sorted(values), "ok": values == {expected}})
    near = [w for w in ball.words if len(w) <= 2]
    zs = [extend_along(G, (), v, (2,) * n) for v in near]
    exps = set()
    for z in zs:
        for y in near:
            exps.add(rn_exponent(m_vector(G, (), y, z), n))
    exps = sorted(exps)
    return {
        "n": n,
        "q": q,
        "generators": rows,
        "generators_ok": all(r["ok"] for r in rows),
        "exponents": exps,
        "elements": len(near),
        "cylinders": len(zs),
    }


# -- piecewise maps ----------------------------------------------------------


@dataclass
class PiecewiseMap:
    """Pieces (source cylinder, mover, target cylinder), all based at 1.

    Word arrays are padded with -1; row i of ``sources`` is the target word
    of the source cylinder Omega_1^{x3} of piece i.
    """

    x: Word
    y: Word
    levels: int
    K: int
    roots_paired: int
    roots_total: int
    sources: np.ndarray
    movers: np.ndarray
    targets: np.ndarray
    level: np.ndarray
    covered: Fraction
    expected_coverage: Fraction
    source_measure: Fraction
    target_measure: Fraction
    measure_preserving: bool
    checks: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.level)

    @staticmethod
    def _row(arr, i) -> Word:
        r = arr[i]
        return tuple(int(v) for v in r[r >= 0])

    def piece(self, i: int):
        return self._row(self.sources, i), self._row(self.movers, i), self._row(self.targets, i)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def summary(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "levels": self.levels,
            "K": self.K,
            "pieces": len(self),
            "roots": f"{self.roots_paired}/{self.roots_total}",
            "covered": self.covered,
            "expected_coverage": self.expected_coverage,
            "source_measure": self.source_measure,
            "target_measure": self.target_measure,
            "measure_preserving": self.measure_preserving,
            "checks": dict(self.checks),
            "ok": self.ok,
        }


def _tables(G: TriangleGroup):
    N, n = G.size, G.n
    kind = np.array(G.kind, np.int8).reshape(N, N)
    out1 = np.array(G.out1, np.int32).reshape(N, N)
    out2 = np.array(G.out2, np.int32).reshape(N, N)
    lam = np.array(G.lam, np.int32)
    dims = np.array(G.dims, np.int32)
    geo = G.geometry
    contains = np.array(
        [[geo.contains(a, b) for b in range(N)] for a in range(N)], np.bool_
    )
    width = max(len(geo.of_dim(d)) for d in range(1, n + 1))
    layers = np.full((n + 1, width), -1, np.int32)
    layer_len = np.zeros(n + 1, np.int32)
    for d in range(1, n + 1):
        ids = geo.of_dim(d)
        layers[d, : len(ids)] = ids
        layer_len[d] = len(ids)
    return kind, out1, out2, lam, dims, contains, layers, layer_len


_TABLES: dict[str, tuple] = {}


def kernel_tables(G: TriangleGroup):
    if G.digest not in _TABLES:
        _TABLES[G.digest] = _tables(G)
    return _TABLES[G.digest]


def kernel_reduce(G: TriangleGroup, words) -> list[Word]:
    """Normal forms via the compiled engine (used to cross-check wordcore)."""
    kind, out1, out2 = kernel_tables(G)[:3]
    words = [tuple(w) for w in words]
    arr = np.full((len(words), K_.MAXLEN), -1, np.int32)
    lens = np.zeros(len(words), np.int32)
    for i, w in enumerate(words):
        if len(w) > K_.MAXLEN:
            raise UsageError(f"word longer than {K_.MAXLEN}")
        arr[i, : len(w)] = w
        lens[i] = len(w)
    out, olen = K_.reduce_rows(arr, lens, kind, out1, out2)
    return [tuple(int(v) for v in out[i, : olen[i]]) for i in range(len(words))]


def _words_array(words) -> np.ndarray:
    arr = np.full((max(len(words), 1), K_.MAXLEN), -1, np.int32)
    for i, w in enumerate(words):
        arr[i, : len(w)] = w
    return arr


def _shape_rows(arr: np.ndarray, dims: np.ndarray, n: int) -> np.ndarray:
    d = np.where(arr >= 0, dims[np.maximum(arr, 0)], 0)
    return np.stack([(d == i).sum(axis=1) for i in range(1, n + 1)], axis=1)


def _unique_rows(arr: np.ndarray) -> bool:
    return len(np.unique(arr, axis=0)) == len(arr)


def phi_construct(
    G: TriangleGroup,
    x,
    y,
    levels: int = 3,
    ball: CayleyBall | None = None,
    threads: int = 1,
) -> PiecewiseMap:
    """Piecewise map from Omega_1^x toward Omega_1^y by group elements.

    Omega_1^x and Omega_1^y are refined by delta = e_1 + e_n and the
    children paired in sorted order.  Each pair (x1, y1) receives the piece
    Omega^{x3} -> Omega^{y3} with mover y2 x2^{-1}; the other K - 1 children
    of x1 and y1 are paired and the step repeats, for `levels` levels.
    """
    n, q = G.n, G.q
    if n < 2:
        raise UsageError("the construction needs n >= 2")
    if levels < 1:
        raise UsageError("levels must be at least 1")
    x, y = G.reduce(x), G.reduce(y)
    k, k2 = G.shape(x), G.shape(y)
    delta = (1,) + (0,) * (n - 2) + (1,)
    step = (1,) + (0,) * (n - 2) + (2,)
    if ball is not None:
        require_radius(ball, sum(step), "phi_construct")
    xs = [c.target for c in refine_cylinder(G, cylinder(G, (), x), delta, ball)]
    ys = [c.target for c in refine_cylinder(G, cylinder(G, (), y), delta, ball)]
    roots = list(zip(xs, ys))
    R = ball.sphere(step) if ball is not None else G.normal_words(step)
    Kx = len(refine_cylinder(G, cylinder(G, (), xs[0]), step, ball))
    Ky = len(refine_cylinder(G, cylinder(G, (), ys[0]), step, ball))
    if Kx != Ky:
        raise ConsistencyError(f"child counts differ: {Kx} for x, {Ky} for y")
    K = Kx
    cap = sum((K - 1) ** i for i in range(levels))
    tables = kernel_tables(G)
    kind, out1, out2, lam, dims, contains, layers, layer_len = tables
    Rarr = _words_array(R)
    Rlen = sum(step)

    def run(pair):
        a, b = pair
        src = np.full((cap, K_.MAXLEN), -1, np.int32)
        tgt = np.full((cap, K_.MAXLEN), -1, np.int32)
        mov = np.full((cap, K_.MAXLEN), -1, np.int32)
        srcl = np.zeros(cap, np.int32)
        tgtl = np.zeros(cap, np.int32)
        movl = np.zeros(cap, np.int32)
        lev = np.zeros(cap, np.int32)
        got = K_.phi_tree(
            np.array(a, np.int32), len(a), np.array(b, np.int32), len(b), levels, K, n,
            lam, dims, kind, out1, out2, contains, layers, layer_len, Rarr, Rlen,
            src, srcl, tgt, tgtl, mov, movl, lev,
        )
        if got < 0:
            raise ConsistencyError(
                f"construction failed for cylinder pair {a} -> {b}: {K_.ERROR_NAMES.get(got, got)}"
            )
        return src[:got], tgt[:got], mov[:got], lev[:got]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, roots))
    else:
        parts = [run(p) for p in roots]
    width = 1
    for s, t, m, _ in parts:
        for arr in (s, t, m):
            used = (arr >= 0).sum(axis=1)
            if len(used):
                width = max(width, int(used.max()))
    sources = np.concatenate([p[0][:, :width] for p in parts])
    targets = np.concatenate([p[1][:, :width] for p in parts])
    movers = np.concatenate([p[2][:, :width] for p in parts])
    level = np.concatenate([p[3] for p in parts])

    # exact measure bookkeeping, level by level
    size_k = sphere_size(k, n, q)
    covered = Fraction(0)
    src_total = Fraction(0)
    tgt_total = Fraction(0)
    shapes_ok = True
    preserving = True
    sh_src = _shape_rows(sources, dims, n)
    sh_tgt = _shape_rows(targets, dims, n)
    for L in range(levels):
        sel = level == L
        count = int(sel.sum())
        ks = tuple(a + b + (L + 1) * c for a, b, c in zip(k, delta, step))
        kt = tuple(a + b + (L + 1) * c for a, b, c in zip(k2, delta, step))
        shapes_ok &= bool((sh_src[sel] == ks).all() and (sh_tgt[sel] == kt).all())
        ms, mt = Fraction(1, sphere_size(ks, n, q)), Fraction(1, sphere_size(kt, n, q))
        preserving &= ms == mt
        src_total += count * ms
        tgt_total += count * mt
    covered = src_total * size_k
    expected = Fraction(len(roots), len(xs)) * (1 - (1 - Fraction(1, K)) ** levels)
    checks = {
        "shapes": shapes_ok,
        "sources_distinct": _unique_rows(sources),
        "targets_distinct": _unique_rows(targets),
        "coverage": covered == expected,
        "piece_count": len(level) == len(roots) * cap,
    }
    if k == k2:
        checks["measure_preserving"] = preserving and src_total == tgt_total
    return PiecewiseMap(
        x, y, levels, K, len(roots), len(xs), sources, movers, targets, level,
        covered, expected, src_total, tgt_total, preserving, checks,
    )


def verify_pieces(G: TriangleGroup, pm: PiecewiseMap, stride: int = 1) -> dict:
    """Recheck pieces with the reference word engine.

    For every stride-th piece: target = mover * source, and x (resp. y)
    lies in the convex hull of 1 and the source (resp. target), so the
    piece cylinders sit inside Omega_1^x and Omega_1^y.
    """
    bad = []
    checked = 0
    for i in range(0, len(pm), stride):
        s, m, t = pm.piece(i)
        checked += 1
        if G.multiply(m, s) != t or not in_convex_hull(G, pm.x, s) or not in_convex_hull(G, pm.y, t):
            bad.append(i)
    return {"checked": checked, "failures": bad[:10], "ok": not bad}


def transitivity_witnesses(
    G: TriangleGroup,
    k,
    levels: int = 3,
    ball: CayleyBall | None = None,
    threads: int = 1,
    stride: int = 97,
) -> dict:
    """Witness maps between every ordered pair of distinct vertices of S_k.

    For k = 0 the only pair is (1, 1).  Each witness is summarized and its
    pieces are cross-checked with the reference engine every `stride` pieces.
    """
    k = tuple(k)
    verts = G.normal_words(k)
    pairs = [(a, b) for a in verts for b in verts if a != b] or [(verts[0], verts[0])]
    rows = []
    for a, b in pairs:
        pm = phi_construct(G, a, b, levels, ball, threads)
        v = verify_pieces(G, pm, stride)
        row = pm.summary()
        row["reference_check"] = v
        row["ok"] = pm.ok and v["ok"] and pm.covered >= pm.expected_coverage
        rows.append(row)
    return {
        "k": k,
        "levels": levels,
        "pairs": len(pairs),
        "pieces": sum(r["pieces"] for r in rows),
        "witnesses": rows,
        "ok": all(r["ok"] for r in rows),
    }


# -- classification ----------------------------------------------------------


def classify(
    G: TriangleGroup | None = None,
    ball: CayleyBall | None = None,
    *,
    n: int | None = None,
    q: int | None = None,
    census: dict | None = None,
    witness_shape=None,
    levels: int = 1,
    threads: int = 1,
) -> dict:
    """Assemble the type certificate.

    Sections: (a) generator RN census, (b) gcd and parity of attained
    exponents, (c) transitivity witnesses at finite depth, (d) the reported
    lambda.  Without a group only (d) is produced.  Section (c) is evidence
    at the tested depth, not a proof of ergodicity.
    """
    if G is not None:
        n, q = G.n, G.q
    if n is None or q is None:
        raise UsageError("classify needs a presentation or both n and q")
    desc = ratio_descriptor(n, q)
    cert = {
        "n": n,
        "q": q,
        "descriptor": desc.to_dict(),
        "sections": {},
        "scope": "sections (a)-(c) are finite-depth evidence; they do not prove the "
        "almost-everywhere statements",
    }
    sec = cert["sections"]
    if G is None:
        sec["d"] = {"lambda": desc.lam, "ok": True}
        cert["mode"] = "descriptor-only"
        cert["status"] = "PASSED"
        cert["lambda"] = desc.lam
        return cert
    cert["mode"] = "full"
    cert["presentation"] = G.digest
    if census is None:
        if ball is None:
            raise UsageError("classify needs a ball for the census")
        census = generator_rn_census(G, ball)
    sec["a"] = {"generators": census["generators"], "ok": bool(census["generators_ok"])}
    exps = census["exponents"]
    g = math.gcd(*exps) if exps else 0
    parity_bad = [e for e in exps if e % desc.g]
    sec["b"] = {
        "exponents": exps,
        "gcd": g,
        "expected_gcd": desc.g,
        "violations": parity_bad,
        "ok": g == desc.g and not parity_bad,
    }
    if witness_shape is None:
        witness_shape = (1,) + (0,) * (n - 1)
    wit = transitivity_witnesses(G, witness_shape, levels, ball, threads)
    sec["c"] = {
        "k": list(witness_shape),
        "levels": levels,
        "pairs": wit["pairs"],
        "pieces": wit["pieces"],
        "failed_pairs": [[list(r["x"]), list(r["y"])] for r in wit["witnesses"] if not r["ok"]][:10],
        "ok": wit["ok"],
    }
    sec["d"] = {"lambda": desc.lam, "ok": True}
    cert["lambda"] = desc.lam
    cert["status"] = "PASSED" if all(s["ok"] for s in sec.values()) else "FAILED"
    return cert


# -- triangle census ---------------------------------------------------------


def _hull(G: TriangleGroup, a: Word, b: Word) -> bool:
    sa, sb = G.shape(a), G.shape(b)
    rel = G.relative_shape(a, b)
    return tuple(i + j for i, j in zip(sa, rel)) == sb


def triangle_census(G: TriangleGroup, ball: CayleyBall, m: int, method: str = "grow") -> int:
    """Number of apex-1 triangles of size m (vertices of a sector within distance m).

    A triangle is recorded by its far edge (v_0, ..., v_m), v_a of shape
    (a, m - a).  "grow" builds the far edges size by size: each new vertex
    w_a is a neighbour of the previous edge with v_a and v_{a-1} in
    conv{1, w_a} and w_{a-1} adjacent to w_a.  "project" reads the far edge
    off conv{1, x} for every x of shape (m, m).
    """
    if G.n != 2:
        raise UsageError("the triangle census is defined for n = 2")
    if m < 1:
        raise UsageError("m must be at least 1")
    if method == "grow":
        require_radius(ball, m, "triangle census")
        return len(_grow_triangles(G, ball, m))
    if method == "project":
        require_radius(ball, 2 * m, "projected triangle census")
        return len(_project_triangles(G, ball, m))
    raise UsageError(f"unknown method {method!r}")


def _grow_triangles(G: TriangleGroup, ball: CayleyBall, m: int) -> set:
    edges = {((),)}
    for size in range(m):
        nxt = set()
        for edge in edges:
            ids = [ball.id_of(v) for v in edge]

            def nbrs(j, want):
                out = []
                for nid in ball.adjacency[ids[j]]:
                    if nid >= 0:
                        w = ball.words[nid]
                        if len(w) == size + 1 and G.shape(w) == want:
                            out.append(w)
                return out

            def rec(a, acc):
                if a == size + 2:
                    nxt.add(tuple(acc))
                    return
                want = (a, size + 1 - a)
                pool = nbrs(a, want) if a <= size else nbrs(size, want)
                for w in pool:
                    if a <= size and not _hull(G, edge[a], w):
                        continue
                    if a >= 1 and not _hull(G, edge[a - 1], w):
                        continue
                    if a >= 1 and G.distance(acc[-1], w) != 1:
                        continue
                    acc.append(w)
                    rec(a + 1, acc)
                    acc.pop()

            rec(0, [])
        edges = nxt
    return edges


def _project_triangles(G: TriangleGroup, ball: CayleyBall, m: int) -> set:
    layers = {a: ball.sphere((a, m - a)) for a in range(m + 1)}
    out = set()
    for x in ball.sphere((m, m)):
        edge = []
        for a in range(m + 1):
            hits = [v for v in layers[a] if _hull(G, v, x)]
            if len(hits) != 1:
                raise ConsistencyError(f"conv(1, {x}) has {len(hits)} vertices of shape {(a, m - a)}")
            edge.append(hits[0])
        out.add(tuple(edge))
    return out
