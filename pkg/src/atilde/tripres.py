"""Triangle presentations over a finite projective geometry.

A presentation is a set T of ordered triples (u, v, w) of geometry indices
together with an involution lam.  The five axioms are

1. (u, v, w) in T for some w  iff  lam(u) and v are distinct and incident;
2. (u, v, w) in T  implies (v, w, u) in T;
3. (u, v, w1), (u, v, w2) in T implies w1 == w2;
4. (u, v, w) in T  implies (lam(w), lam(v), lam(u)) in T;
5. dim u + dim v + dim w == 0 mod n+1 for every triple.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, UsageError
from .pgeom import (
    Duality,
    Geometry,
    VectorGeometry,
    annihilator_duality,
    geometry_from_spec,
    singer_labeling,
    validate_duality,
)

FORMAT = "atilde.presentation.v1"


@dataclass(frozen=True)
class TrianglePresentation:
    geometry: Geometry
    lam: Duality
    triples: frozenset

    @property
    def n(self) -> int:
        return self.geometry.n

    @property
    def q(self) -> int:
        return self.geometry.q

    def table(self) -> dict[tuple[int, int], set[int]]:
        out = defaultdict(set)
        for u, v, w in self.triples:
            out[u, v].add(w)
        return out

    def to_dict(self, meta: dict | None = None) -> dict:
        return {
            "format": FORMAT,
            "geometry": self.geometry.to_spec(),
            "lambda": list(self.lam.map),
            "triples": [list(t) for t in sorted(self.triples)],
            "meta": meta or {},
        }

    def digest(self) -> str:
        body = self.to_dict()
        del body["meta"]
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def demanded_pairs(G: Geometry, lam: Duality) -> list[tuple[int, int]]:
    """Pairs (u, v) with lam(u), v distinct and incident, in search order."""
    pairs = [
        (u, v)
        for u in range(G.size)
        for v in range(G.size)
        if lam(u) != v and G.incident(lam(u), v)
    ]
    pairs.sort(key=lambda p: (G.dims[p[0]], G.dims[p[1]], p))
    return pairs


@dataclass
class AxiomResult:
    ok: bool = True
    witnesses: list = field(default_factory=list)

    def fail(self, witness) -> None:
        self.ok = False
        if len(self.witnesses) < 20:
            self.witnesses.append(witness)


@dataclass
class PresentationReport:
    axioms: dict[int, AxiomResult]
    triple_count: int
    demanded_pair_count: int

    @property
    def valid(self) -> bool:
        return all(r.ok for r in self.axioms.values())

    def summary(self) -> dict:
        return {
            "valid": self.valid,
            "triples": self.triple_count,
            "demanded_pairs": self.demanded_pair_count,
            "axioms": {
                str(i): {"ok": r.ok, "witnesses": [list(w) for w in r.witnesses]}
                for i, r in sorted(self.axioms.items())
            },
        }


def validate_presentation(P: TrianglePresentation) -> PresentationReport:
    G, lam, T = P.geometry, P.lam, P.triples
    res = {i: AxiomResult() for i in range(1, 6)}
    demanded = set(demanded_pairs(G, lam))
    table = P.table()
    for pair in sorted(demanded):
        if pair not in table:
            res[1].fail(pair)
    for pair in sorted(table):
        if pair not in demanded:
            res[1].fail(pair)
    for u, v, w in sorted(T):
        if (v, w, u) not in T:
            res[2].fail((u, v, w))
        if (lam(w), lam(v), lam(u)) not in T:
            res[4].fail((u, v, w))
        if (G.dims[u] + G.dims[v] + G.dims[w]) % (G.n + 1):
            res[5].fail((u, v, w))
    for (u, v), ws in sorted(table.items()):
        if len(ws) > 1:
            res[3].fail((u, v, *sorted(ws)))
    return PresentationReport(res, len(T), len(demanded))


def _orbit(t, lam):
    u, v, w = t
    a, b, c = lam(w), lam(v), lam(u)
    return {(u, v, w), (v, w, u), (w, u, v), (a, b, c), (b, c, a), (c, a, b)}


def search_presentations(
    G: Geometry,
    lam: Duality,
    limit: int = 1,
    seed: int = 0,
    node_budget: int | None = None,
    stats: dict | None = None,
) -> list[TrianglePresentation]:
    """Backtracking search for presentations compatible with lam.

    Demanded pairs are filled in a fixed order; every tentative triple is
    closed under rotation and the lam-reversal before the next pair is
    considered.  Seed 0 tries candidates in index order; other seeds shuffle
    the candidate lists reproducibly.  ``stats`` (if given) receives node
    counts and whether the space was exhausted or the budget ran out.
    """
    report = validate_duality(lam, G)
    if not report.valid:
        raise UsageError("lambda is not a valid duality: " + "; ".join(report.violations[:3]))
    out: list[TrianglePresentation] = []
    info = {"nodes": 0, "exhausted": False, "budget_hit": False, "found": 0}
    if limit <= 0:
        if stats is not None:
            stats.update(info)
        return out

    n1 = G.n + 1
    dims = G.dims
    pairs = demanded_pairs(G, lam)
    demanded = set(pairs)
    rng = random.Random(seed)
    cands: dict[tuple[int, int], list[int]] = {}
    for u, v in pairs:
        ws = [
            w
            for w in range(G.size)
            if (dims[u] + dims[v] + dims[w]) % n1 == 0 and (v, w) in demanded and (w, u) in demanded
        ]
        if seed:
            rng.shuffle(ws)
        cands[u, v] = ws

    assign: dict[tuple[int, int], int] = {}

    def place(t):
        """Assign the closure of t; return the new keys or None on conflict."""
        added = []
        for a, b, c in _orbit(t, lam):
            if (a, b) not in demanded:
                break
            prev = assign.get((a, b))
            if prev is None:
                assign[a, b] = c
                added.append((a, b))
            elif prev != c:
                break
        else:
            return added
        for key in added:
            del assign[key]
        return None

    class _Stop(Exception):
        pass

    def rec(pos: int) -> None:
        while pos < len(pairs) and pairs[pos] in assign:
            pos += 1
        if pos == len(pairs):
            triples = frozenset((a, b, c) for (a, b), c in assign.items())
            out.append(TrianglePresentation(G, lam, triples))
            if len(out) >= limit:
                raise _Stop
            return
        u, v = pairs[pos]
        for w in cands[u, v]:
            info["nodes"] += 1
            if node_budget is not None and info["nodes"] > node_budget:
                info["budget_hit"] = True
                raise _Stop
            added = place((u, v, w))
            if added is None:
                continue
            rec(pos + 1)
            for key in added:
                del assign[key]

    try:
        rec(0)
        info["exhausted"] = True
    except _Stop:
        pass
    info["found"] = len(out)
    if stats is not None:
        stats.update(info)
    return out


def _zero_sum_split(D: list[int], N: int) -> bool:
    """Can D be cut into singletons d with 3d = 0 and triples summing to 0 mod N?"""
    if not D:
        return True
    a, rest = D[0], D[1:]
    if (3 * a) % N == 0 and _zero_sum_split(rest, N):
        return True
    for b, c in itertools.permutations(rest, 2):
        if (a + b + c) % N == 0 and _zero_sum_split([x for x in rest if x not in (b, c)], N):
            return True
    return False


def cyclic_dualities(G: VectorGeometry) -> list[Duality]:
    """Involutions u -> u + D of a plane in Singer labelling.

    D runs over the translates of the cycle's difference set that split into
    zero-sum triples and 3-torsion singletons; these are the translates for
    which an invariant presentation exists.
    """
    pts = singer_labeling(G)
    N = len(pts)
    label = {p: i for i, p in enumerate(pts)}
    line_of = {}
    for l in G.of_dim(2):
        line_of[frozenset(label[p] for p in pts if G.incident(p, l))] = l
    base = sorted(min(line_of, key=sorted))
    out = []
    for c in range(N):
        D = sorted((d + c) % N for d in base)
        if not _zero_sum_split(D, N):
            continue
        lam = [0] * G.size
        for u in range(N):
            l = line_of[frozenset((u + d) % N for d in D)]
            lam[pts[u]], lam[l] = l, pts[u]
        out.append(Duality(tuple(lam)))
    return out


def find_presentation(
    G: Geometry,
    limit: int = 1,
    seed: int = 0,
    node_budget: int | None = 10**6,
    stats: dict | None = None,
) -> list[TrianglePresentation]:
    """Search over a deterministic list of candidate dualities.

    The annihilator duality comes first, then (for planes) the Singer-cyclic
    involutions.  Returns the presentations found for the first duality that
    admits any.
    """
    if not isinstance(G, VectorGeometry):
        raise UsageError("automatic duality selection needs a vector geometry")
    candidates = [annihilator_duality(G)]
    if G.n == 2:
        candidates += cyclic_dualities(G)
    tried = []
    for lam in candidates:
        info: dict = {}
        found = search_presentations(G, lam, limit, seed, node_budget, info)
        tried.append(info)
        if found:
            break
    if stats is not None:
        stats.update({"dualities_tried": len(tried), "searches": tried})
    return found


def save_presentation(P: TrianglePresentation, path, meta: dict | None = None) -> None:
    Path(path).write_text(json.dumps(P.to_dict(meta), indent=1, sort_keys=True) + "\n")


def presentation_from_dict(doc: dict) -> TrianglePresentation:
    if not isinstance(doc, dict):
        raise ParseError("presentation document must be a JSON object")
    for key in ("geometry", "lambda", "triples"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    try:
        G = geometry_from_spec(doc["geometry"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"field 'geometry': {exc}") from exc
    lam = doc["lambda"]
    if not isinstance(lam, list) or len(lam) != G.size:
        raise ParseError(f"field 'lambda': expected a list of {G.size} indices")
    for i, x in enumerate(lam):
        if not isinstance(x, int) or not 0 <= x < G.size:
            raise ParseError(f"field 'lambda'[{i}]: index {x!r} out of range")
    triples = []
    for i, t in enumerate(doc["triples"]):
        if not isinstance(t, list) or len(t) != 3:
            raise ParseError(f"field 'triples'[{i}]: expected three indices")
        for x in t:
            if not isinstance(x, int) or not 0 <= x < G.size:
                raise ParseError(f"field 'triples'[{i}]: index {x!r} out of range")
        triples.append(tuple(t))
    return TrianglePresentation(G, Duality(tuple(lam)), frozenset(triples))


def load_presentation(path) -> TrianglePresentation:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return presentation_from_dict(doc)
