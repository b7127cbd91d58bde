"""Normal-form words of a triangle-presentation group and its Cayley ball.

Words are tuples of geometry indices.  Every group element has a unique
normal form u_1 ... u_l with dim u_i <= dim u_{i+1} and lam(u_i) v u_{i+1}
spanning the whole space; as a vertex of the building its distance from the
identity is l and its sector coordinate (shape) counts letters by dim.

Reduction appends one letter at a time to a normal prefix.  Each adjacent
pair (u, g) is classified once into a table:

    NORMAL    (u, g) is already in normal form
    CANCEL    g = lam(u)
    CONTRACT  (u, g, w) in T, so u g = lam(w)
    EXCHANGE  u g equals a different normal pair (v', u')

The exchange entries are found by testing which candidate pairs make the
length-4 word lam(v') u g lam(u') trivial using the shortening rules only.
"""

from __future__ import annotations

import hashlib
import random
import struct
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BudgetExceeded, ConsistencyError, ParseError, RangeError, UsageError
from .tripres import TrianglePresentation

NORMAL, CANCEL, CONTRACT, EXCHANGE = 0, 1, 2, 3

Word = tuple


class TriangleGroup:
    """Reduction tables and word arithmetic for one presentation."""

    def __init__(self, P: TrianglePresentation):
        self.presentation = P
        G = P.geometry
        self.geometry = G
        self.n, self.q = G.n, G.q
        self.size = N = G.size
        self.dims = G.dims
        self.lam = list(P.lam.map)
        self.digest = P.digest()
        kind = [NORMAL] * (N * N)
        out1 = [-1] * (N * N)
        out2 = [-1] * (N * N)
        table = {(u, v): w for u, v, w in P.triples}
        lam, dims = self.lam, self.dims
        for u in range(N):
            for v in range(N):
                i = u * N + v
                if v == lam[u]:
                    kind[i] = CANCEL
                elif (u, v) in table:
                    kind[i] = CONTRACT
                    out1[i] = lam[table[u, v]]
                elif dims[u] <= dims[v] and G.spans_whole(lam[u], v):
                    kind[i] = NORMAL
                else:
                    kind[i] = EXCHANGE
        self.kind, self.out1, self.out2 = kind, out1, out2
        self._build_exchange_table()

    # -- tables ----------------------------------------------------------

    def _shortens_to_identity(self, word) -> bool:
        """Can word be rewritten to the empty word by cancel/contract steps?"""
        if not word:
            return True
        N, kind, out1 = self.size, self.kind, self.out1
        for i in range(len(word) - 1):
            k = kind[word[i] * N + word[i + 1]]
            if k == CANCEL:
                nxt = word[:i] + word[i + 2 :]
            elif k == CONTRACT:
                nxt = word[:i] + (out1[word[i] * N + word[i + 1]],) + word[i + 2 :]
            else:
                continue
            if self._shortens_to_identity(nxt):
                return True
        return False

    def _exchange_candidates(self, u: int, v: int) -> set[tuple[int, int]]:
        """Pairs (a, b) for which lam(a) u v lam(b) might be trivial.

        A shortening derivation of that word must start at its first or
        last adjacent pair, and either start determines the other letter.
        """
        N, kind, out1, lam = self.size, self.kind, self.out1, self.lam
        out = set()
        for a in range(N):
            i = lam[a] * N + u
            if kind[i] != CONTRACT:
                continue
            c = out1[i]
            j = c * N + v
            if kind[j] == CONTRACT:
                out.add((a, out1[j]))
        for b in range(N):
            i = v * N + lam[b]
            if kind[i] != CONTRACT:
                continue
            c = out1[i]
            j = u * N + c
            if kind[j] == CONTRACT:
                out.add((lam[out1[j]], b))
        return out

    def _build_exchange_table(self) -> None:
        N, kind, lam, dims = self.size, self.kind, self.lam, self.dims
        n1 = self.n + 1
        self.exchange_domain = []
        for u in range(N):
            for v in range(N):
                i = u * N + v
                if kind[i] != EXCHANGE:
                    continue
                self.exchange_domain.append((u, v))
                found = sorted(
                    (a, b)
                    for a, b in self._exchange_candidates(u, v)
                    if kind[a * N + b] == NORMAL
                    and (dims[a] + dims[b] - dims[u] - dims[v]) % n1 == 0
                    and self._shortens_to_identity((lam[a], u, v, lam[b]))
                )
                if len(found) != 1:
                    raise ConsistencyError(
                        f"pair {(u, v)} has {len(found)} normal exchange candidates {found[:4]}; "
                        "presentation rejected"
                    )
                self.out1[i], self.out2[i] = found[0]

    def exchange_table(self) -> dict[tuple[int, int], tuple[int, int]]:
        N = self.size
        return {(u, v): (self.out1[u * N + v], self.out2[u * N + v]) for u, v in self.exchange_domain}

    # -- words -----------------------------------------------------------

    def check_word(self, word) -> Word:
        word = tuple(word)
        for g in word:
            if not isinstance(g, int) or not 0 <= g < self.size:
                raise UsageError(f"letter {g!r} is not a generator index 0..{self.size - 1}")
        return word

    def append(self, x: Word, g: int) -> Word:
        """Normal form of x*g for a normal word x."""
        return self._push(list(x), [g])

    def _push(self, stack: list, pending: list) -> Word:
        N, kind, out1, out2 = self.size, self.kind, self.out1, self.out2
        while pending:
            g = pending.pop()
            if not stack:
                stack.append(g)
                continue
            i = stack[-1] * N + g
            k = kind[i]
            if k == NORMAL:
                stack.append(g)
            elif k == CANCEL:
                stack.pop()
            elif k == CONTRACT:
                stack.pop()
                pending.append(out1[i])
            else:
                stack.pop()
                pending.append(out2[i])
                pending.append(out1[i])
        return tuple(stack)

    def reduce(self, word, rng: random.Random | None = None) -> Word:
        """Normal form of an arbitrary word.

        Without rng, letters are appended left to right.  With rng, rewrite
        rules are applied at randomly chosen positions until none applies,
        which exercises independence of the rule order.
        """
        word = self.check_word(word)
        if rng is None:
            return self._push([], list(reversed(word)))
        N, kind, out1, out2 = self.size, self.kind, self.out1, self.out2
        w = list(word)
        while True:
            spots = [i for i in range(len(w) - 1) if kind[w[i] * N + w[i + 1]] != NORMAL]
            if not spots:
                return tuple(w)
            i = rng.choice(spots)
            j = w[i] * N + w[i + 1]
            k = kind[j]
            if k == CANCEL:
                w[i : i + 2] = []
            elif k == CONTRACT:
                w[i : i + 2] = [out1[j]]
            else:
                w[i : i + 2] = [out1[j], out2[j]]

    def multiply(self, x: Word, y: Word) -> Word:
        return self._push(list(x), list(reversed(y)))

    def inverse(self, x: Word) -> Word:
        lam = self.lam
        return tuple(lam[u] for u in reversed(x))

    def is_normal(self, x) -> bool:
        N, kind = self.size, self.kind
        return all(kind[x[i] * N + x[i + 1]] == NORMAL for i in range(len(x) - 1))

    def shape(self, x: Word) -> tuple[int, ...]:
        k = [0] * self.n
        for u in x:
            k[self.dims[u] - 1] += 1
        return tuple(k)

    def vertex_type(self, x: Word) -> int:
        return sum(self.dims[u] for u in x) % (self.n + 1)

    def distance(self, x: Word, y: Word) -> int:
        return len(self.multiply(self.inverse(x), y))

    def relative_shape(self, x: Word, y: Word) -> tuple[int, ...]:
        """Shape of x^{-1} y, the sector coordinate of y seen from x."""
        return self.shape(self.multiply(self.inverse(x), y))

    # -- enumeration -------------------------------------------------------

    def iter_normal_words(self, k):
        """Normal words of shape k, lazily, in lexicographic order."""
        k = tuple(k)
        if len(k) != self.n or any(c < 0 for c in k):
            raise UsageError(f"shape {k} is not in Z_+^{self.n}")
        seq = [d for d in range(1, self.n + 1) for _ in range(k[d - 1])]
        layers = {d: self.geometry.of_dim(d) for d in range(1, self.n + 1)}
        N, kind = self.size, self.kind

        def rec(prefix):
            if len(prefix) == len(seq):
                yield tuple(prefix)
                return
            for g in layers[seq[len(prefix)]]:
                if not prefix or kind[prefix[-1] * N + g] == NORMAL:
                    prefix.append(g)
                    yield from rec(prefix)
                    prefix.pop()

        return rec([])

    def normal_words(self, k) -> list[Word]:
        """All normal words of shape k, in lexicographic order."""
        return list(self.iter_normal_words(k))

    def chambers(self) -> list[tuple[int, ...]]:
        """Chambers at the identity, as complete flags of generator indices."""
        return self.geometry.flags()

    def check_chamber(self, C) -> tuple[int, ...]:
        C = tuple(C)
        G = self.geometry
        ok = len(C) == self.n and all(isinstance(c, int) and 0 <= c < G.size for c in C)
        ok = ok and all(G.dims[c] == i + 1 for i, c in enumerate(C))
        ok = ok and all(G.contains(C[i + 1], C[i]) for i in range(len(C) - 1))
        if not ok:
            raise UsageError(f"{C} is not a complete flag of generator indices")
        return C

    def opposite_vertices(self, C) -> list[Word]:
        """Vertices x of shape e_1 + e_n adjacent to every p_i of the chamber.

        With p_1 = C[0], the face {p_1, ..., p_n} is seen from p_1 as the
        flag u'_{i-1} = lam(p_1) * C[i-1]; the opposite vertices are
        x = p_1 u_n for the hyperplanes u_n containing u'_{n-1} other than
        lam(p_1).
        """
        C = self.check_chamber(C)
        G, lam = self.geometry, self.lam
        p1 = C[0]
        if self.n == 1:
            cands = [u for u in G.of_dim(1) if u != lam[p1]]
        else:
            tail = self.multiply((lam[p1],), (C[-1],))
            if len(tail) != 1:
                raise ConsistencyError(f"face of chamber {C} does not contract to one letter")
            cands = [u for u in G.of_dim(self.n) if G.contains(u, tail[0]) and u != lam[p1]]
        out = []
        for u in cands:
            x = self.append((p1,), u)
            if len(x) == 2 and all(self.distance((c,), x) == 1 for c in C):
                out.append(x)
        if len(out) != self.q:
            raise ConsistencyError(f"chamber {C} has {len(out)} opposite vertices, expected {self.q}")
        return out


_GROUPS: dict[str, TriangleGroup] = {}


def group(P: TrianglePresentation) -> TriangleGroup:
    """Cached TriangleGroup for P."""
    key = P.digest()
    if key not in _GROUPS:
        _GROUPS[key] = TriangleGroup(P)
    return _GROUPS[key]


def parse_word(text: str) -> Word:
    """Parse the CLI word syntax ``g3,g11``; the empty string is the identity."""
    text = text.strip()
    if text in ("", "e", "1"):
        return ()
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok.startswith("g") or not tok[1:].isdigit():
            raise UsageError(f"bad letter {tok!r}; expected g<index>")
        out.append(int(tok[1:]))
    return tuple(out)


def format_word(x: Word) -> str:
    return ",".join(f"g{u}" for u in x)


# -- Cayley ball -------------------------------------------------------------

BALL_MAGIC = b"ATBALL01"
_HEADER = struct.Struct("<8sIIIII32s")


@dataclass
class CayleyBall:
    """Vertices within distance R of the identity, sorted by (length, word).

    adjacency[v][g] is the id of v*g or -1 when v*g lies outside the ball.
    """

    group: TriangleGroup
    radius: int
    words: list[Word]
    adjacency: list[list[int]]
    index: dict[Word, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def id_of(self, x: Word) -> int:
        try:
            return self.index[tuple(x)]
        except KeyError:
            raise RangeError(f"word of length {len(x)} is not in the radius-{self.radius} ball") from None

    def neighbor(self, v: int, g: int) -> int:
        return self.adjacency[v][g]

    def sphere(self, k) -> list[Word]:
        """Vertices of shape k, in ball order."""
        k = tuple(k)
        if len(k) != self.group.n or any(c < 0 for c in k):
            raise UsageError(f"shape {k} is not in Z_+^{self.group.n}")
        if sum(k) > self.radius:
            raise RangeError(f"|k| = {sum(k)} exceeds ball radius {self.radius}")
        shape = self.group.shape
        return [w for w in self.words if len(w) == sum(k) and shape(w) == k]

    def radius_counts(self) -> list[int]:
        out = [0] * (self.radius + 1)
        for w in self.words:
            out[len(w)] += 1
        return out

    def to_bytes(self) -> bytes:
        G = self.group
        parts = [
            _HEADER.pack(
                BALL_MAGIC, G.q, G.n, self.radius, len(self.words), G.size, bytes.fromhex(G.digest)
            )
        ]
        for w in self.words:
            parts.append(struct.pack(f"<H{len(w)}H", len(w), *w))
        for row in self.adjacency:
            parts.append(struct.pack(f"<{G.size}i", *row))
        return b"".join(parts)

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()


def build_ball(G: TriangleGroup, R: int, max_vertices: int = 10_000_000) -> CayleyBall:
    """Breadth-first ball of radius R around the identity."""
    if R < 0:
        raise UsageError("radius must be non-negative")
    words: list[Word] = [()]
    index: dict[Word, int] = {(): 0}
    frontier = [()]
    gens = range(G.size)
    for r in range(R):
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.append(x, g)
                if len(y) == r + 1 and y not in index:
                    if len(words) >= max_vertices:
                        partial = _finish_ball(G, r, words)
                        raise BudgetExceeded(
                            f"ball exceeded {max_vertices} vertices while building radius {r + 1}",
                            partial=partial,
                            high_water=len(words),
                        )
                    index[y] = len(words)
                    words.append(y)
                    nxt.append(y)
        frontier = nxt
    return _finish_ball(G, R, words)


def _finish_ball(G: TriangleGroup, R: int, words: list[Word]) -> CayleyBall:
    words = sorted((w for w in words if len(w) <= R), key=lambda w: (len(w), w))
    index = {w: i for i, w in enumerate(words)}
    adjacency = []
    for w in words:
        adjacency.append([index.get(G.append(w, g), -1) for g in range(G.size)])
    return CayleyBall(G, R, words, adjacency, index)


def save_ball(ball: CayleyBall, path) -> None:
    Path(path).write_bytes(ball.to_bytes())


def load_ball(path, G: TriangleGroup) -> CayleyBall:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ParseError(f"{path}: truncated header")
    magic, q, n, R, count, size, digest = _HEADER.unpack_from(data, 0)
    if magic != BALL_MAGIC:
        raise ParseError(f"{path}: not a ball file (magic {magic!r})")
    if (q, n, size) != (G.q, G.n, G.size) or digest.hex() != G.digest:
        raise ParseError(f"{path}: ball was built for a different presentation")
    off = _HEADER.size
    words = []
    try:
        for _ in range(count):
            (length,) = struct.unpack_from("<H", data, off)
            words.append(struct.unpack_from(f"<{length}H", data, off + 2))
            off += 2 + 2 * length
        row = struct.Struct(f"<{size}i")
        adjacency = []
        for _ in range(count):
            adjacency.append(list(row.unpack_from(data, off)))
            off += row.size
    except struct.error as exc:
        raise ParseError(f"{path}: truncated body at byte {off}") from exc
    if off != len(data):
        raise ParseError(f"{path}: {len(data) - off} trailing bytes")
    return CayleyBall(G, R, words, adjacency)
