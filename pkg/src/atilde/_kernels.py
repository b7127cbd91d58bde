"""Compiled word arithmetic for the bulk piecewise-map construction.

Words live in rows of fixed-width int32 arrays with an explicit length.  The
reduction rules are the same tables as in ``wordcore`` (kind/out1/out2 as
N x N arrays); the Python engine stays the reference and the tests compare
the two on random words.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MAXLEN = 64

NORMAL, CANCEL, CONTRACT = 0, 1, 2

# error codes returned by phi_tree
ERR_NO_T = -1
ERR_NO_VN = -2
ERR_NO_Z = -3
ERR_NO_FLAG = -4
ERR_NO_W = -5
ERR_MOVER = -6
ERR_X3_NOT_CHILD = -7
ERR_CAPACITY = -8
ERR_Y3_NOT_CHILD = -9
ERR_FACE = -10
ERR_TOO_LONG = -11
ERR_DUPLICATE_CHILD = -12
ERR_K_CHANGED = -13

ERROR_NAMES = {
    ERR_NO_T: "no hyperplane extends the source word",
    ERR_NO_VN: "no admissible v_n",
    ERR_NO_Z: "no admissible z",
    ERR_NO_FLAG: "no flag extension passes the length tests",
    ERR_NO_W: "no opposite vertex gives additive shapes",
    ERR_MOVER: "mover does not carry source to target",
    ERR_X3_NOT_CHILD: "source is not a child of its parent cylinder",
    ERR_CAPACITY: "piece buffer too small",
    ERR_Y3_NOT_CHILD: "target is not a child of its parent cylinder",
    ERR_FACE: "chamber face does not contract to one letter",
    ERR_TOO_LONG: "word longer than the kernel limit",
    ERR_DUPLICATE_CHILD: "refinement produced a repeated child",
    ERR_K_CHANGED: "refinement child count differs from K",
}


@njit(cache=True, nogil=True)
def push(stack, slen, pend, plen, kind, out1, out2):
    """Append the pending letters (last first) to the normal word stack."""
    while plen > 0:
        plen -= 1
        g = pend[plen]
        if slen == 0:
            stack[0] = g
            slen = 1
            continue
        u = stack[slen - 1]
        k = kind[u, g]
        if k == NORMAL:
            if slen >= stack.shape[0]:
                return -1
            stack[slen] = g
            slen += 1
        elif k == CANCEL:
            slen -= 1
        elif k == CONTRACT:
            slen -= 1
            pend[plen] = out1[u, g]
            plen += 1
        else:
            slen -= 1
            pend[plen] = out2[u, g]
            pend[plen + 1] = out1[u, g]
            plen += 2
    return slen


@njit(cache=True, nogil=True)
def multiply(x, xl, y, yl, out, pend, kind, out1, out2):
    """out <- normal form of x*y; returns its length (or -1 on overflow)."""
    for i in range(xl):
        out[i] = x[i]
    for i in range(yl):
        pend[i] = y[yl - 1 - i]
    return push(out, xl, pend, yl, kind, out1, out2)


@njit(cache=True, nogil=True)
def reduce_rows(words, lens, kind, out1, out2):
    """Normal forms of many words (for cross-checking the Python engine)."""
    out = np.full(words.shape, -1, np.int32)
    olen = np.zeros(words.shape[0], np.int32)
    pend = np.zeros(4 * MAXLEN, np.int32)
    empty = np.zeros(1, np.int32)
    for r in range(words.shape[0]):
        buf = np.zeros(MAXLEN, np.int32)
        olen[r] = multiply(empty, 0, words[r], lens[r], buf, pend, kind, out1, out2)
        for i in range(olen[r]):
            out[r, i] = buf[i]
    return out, olen


@njit(cache=True, nogil=True)
def shape_into(w, wl, dims, n, sh):
    for i in range(n):
        sh[i] = 0
    for i in range(wl):
        sh[dims[w[i]] - 1] += 1


@njit(cache=True, nogil=True)
def _lex_less(a, b, length):
    for i in range(length):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


@njit(cache=True, nogil=True)
def children(a, al, R, Rlen, dims, n, kind, out1, out2, buf, pend):
    """Rows c = a*r (r in R) with shape(c) = shape(a) + shape(r), sorted.

    Returns the count, or ERR_DUPLICATE_CHILD if two r give the same c.
    """
    sa = np.zeros(n, np.int32)
    sr = np.zeros(n, np.int32)
    sc = np.zeros(n, np.int32)
    shape_into(a, al, dims, n, sa)
    shape_into(R[0], Rlen, dims, n, sr)
    tmp = np.zeros(MAXLEN, np.int32)
    cnt = 0
    clen = al + Rlen
    for r in range(R.shape[0]):
        L = multiply(a, al, R[r], Rlen, tmp, pend, kind, out1, out2)
        if L != clen:
            continue
        shape_into(tmp, L, dims, n, sc)
        ok = True
        for i in range(n):
            if sc[i] != sa[i] + sr[i]:
                ok = False
        if not ok:
            continue
        # insertion into sorted position
        pos = cnt
        while pos > 0 and _lex_less(tmp, buf[pos - 1], clen):
            for i in range(clen):
                buf[pos, i] = buf[pos - 1, i]
            pos -= 1
        if pos > 0:
            same = True
            for i in range(clen):
                if buf[pos - 1, i] != tmp[i]:
                    same = False
            if same:
                return ERR_DUPLICATE_CHILD
        for i in range(clen):
            buf[pos, i] = tmp[i]
        cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def is_child(a, al, c, cl, step, n, lam, dims, kind, out1, out2, tmp, pend):
    """True iff c = a*r with r of shape step and shape(c) = shape(a) + step."""
    inv = np.zeros(MAXLEN, np.int32)
    for i in range(al):
        inv[i] = lam[a[al - 1 - i]]
    rl = multiply(inv, al, c, cl, tmp, pend, kind, out1, out2)
    if rl < 0:
        return False
    sr = np.zeros(n, np.int32)
    sa = np.zeros(n, np.int32)
    sc = np.zeros(n, np.int32)
    shape_into(tmp, rl, dims, n, sr)
    shape_into(a, al, dims, n, sa)
    shape_into(c, cl, dims, n, sc)
    for i in range(n):
        if sr[i] != step[i] or sc[i] != sa[i] + step[i]:
            return False
    return True


@njit(cache=True, nogil=True)
def _length_after(x, xl, g, tmp, pend, kind, out1, out2):
    one = np.empty(1, np.int32)
    one[0] = g
    return multiply(x, xl, one, 1, tmp, pend, kind, out1, out2)


@njit(cache=True, nogil=True)
def make_piece(a, al, b, bl, n, lam, dims, kind, out1, out2, contains, layers, layer_len,
               x3, y3, mover, lens):
    """One step of the construction for the cylinder pair (Omega^a, Omega^b).

    Writes x3, y3 and the mover y2 x2^{-1}; lens receives their lengths.
    Returns 0 or a negative error code.
    """
    pend = np.zeros(4 * MAXLEN, np.int32)
    tmp = np.zeros(MAXLEN, np.int32)
    tmp2 = np.zeros(MAXLEN, np.int32)
    if al + 4 > MAXLEN or bl + 4 > MAXLEN:
        return ERR_TOO_LONG
    hyper = layers[n]
    nh = layer_len[n]
    la = a[al - 1]
    t = -1
    for j in range(nh):
        if kind[la, hyper[j]] == NORMAL:
            t = hyper[j]
            break
    if t < 0:
        return ERR_NO_T
    vn = -1
    for j in range(nh):
        if kind[t, hyper[j]] == NORMAL:
            vn = hyper[j]
            break
    if vn < 0:
        return ERR_NO_VN
    lb = b[bl - 1]
    z = -1
    if kind[lb, t] == NORMAL and kind[t, vn] == NORMAL:
        z = t
    else:
        for j in range(nh):
            c = hyper[j]
            if kind[lb, c] == NORMAL and kind[c, vn] == NORMAL:
                z = c
                break
    if z < 0:
        return ERR_NO_Z
    x2 = np.zeros(MAXLEN, np.int32)
    y2 = np.zeros(MAXLEN, np.int32)
    for i in range(al):
        x2[i] = a[i]
    x2[al] = t
    x2l = al + 1
    for i in range(bl):
        y2[i] = b[i]
    y2[bl] = z
    y2l = bl + 1
    # chamber {1, v_n, v_n p_2, ..., v_n p_n} from a flag lam(v_n) < p_2 < ... < p_n
    g = np.zeros(n + 1, np.int32)
    prev = lam[vn]
    for i in range(2, n + 1):
        found = -1
        for j in range(layer_len[i]):
            p = layers[i, j]
            if not contains[p, prev] or kind[vn, p] != CONTRACT:
                continue
            gi = out1[vn, p]
            if _length_after(x2, x2l, gi, tmp, pend, kind, out1, out2) != x2l + 1:
                continue
            if _length_after(y2, y2l, gi, tmp, pend, kind, out1, out2) != y2l + 1:
                continue
            found = p
            g[i] = gi
            break
        if found < 0:
            return ERR_NO_FLAG
        prev = found
    # opposite vertex w = p'_1 u_n for the chamber flag (g_2, ..., g_n, v_n)
    p1 = g[2]
    one = np.empty(1, np.int32)
    one[0] = lam[p1]
    two = np.empty(1, np.int32)
    two[0] = vn
    if multiply(one, 1, two, 1, tmp, pend, kind, out1, out2) != 1:
        return ERR_FACE
    face = tmp[0]
    sx = np.zeros(n, np.int32)
    sy = np.zeros(n, np.int32)
    s3 = np.zeros(n, np.int32)
    shape_into(x2, x2l, dims, n, sx)
    shape_into(y2, y2l, dims, n, sy)
    sx[0] += 1
    sx[n - 1] += 1
    sy[0] += 1
    sy[n - 1] += 1
    wrow = np.zeros(2, np.int32)
    ok = False
    for j in range(layer_len[n]):
        un = layers[n, j]
        if un == lam[p1] or kind[p1, un] != NORMAL or not contains[un, face]:
            continue
        wrow[0] = p1
        wrow[1] = un
        L = multiply(x2, x2l, wrow, 2, x3, pend, kind, out1, out2)
        L2 = multiply(y2, y2l, wrow, 2, y3, pend, kind, out1, out2)
        if L != x2l + 2 or L2 != y2l + 2:
            continue
        good = True
        shape_into(x3, L, dims, n, s3)
        for i in range(n):
            if s3[i] != sx[i]:
                good = False
        shape_into(y3, L2, dims, n, s3)
        for i in range(n):
            if s3[i] != sy[i]:
                good = False
        if good:
            lens[0] = L
            lens[1] = L2
            ok = True
            break
    if not ok:
        return ERR_NO_W
    # mover = y2 * x2^{-1}
    xinv = np.zeros(MAXLEN, np.int32)
    for i in range(x2l):
        xinv[i] = lam[x2[x2l - 1 - i]]
    ml = multiply(y2, y2l, xinv, x2l, mover, pend, kind, out1, out2)
    lens[2] = ml
    chk = multiply(mover, ml, x3, lens[0], tmp2, pend, kind, out1, out2)
    if chk != lens[1]:
        return ERR_MOVER
    for i in range(chk):
        if tmp2[i] != y3[i]:
            return ERR_MOVER
    return 0


@njit(cache=True, nogil=True)
def phi_tree(a0, al0, b0, bl0, levels, K, n, lam, dims, kind, out1, out2, contains,
             layers, layer_len, R, Rlen, src, srcl, tgt, tgtl, mov, movl, lev):
    """Run the construction for `levels` levels below the root pair.

    At each level every pending cylinder pair receives one piece; the other
    children of the two cylinders are paired in sorted order and carried to
    the next level.  Returns the number of pieces or a negative error code.
    """
    cap = src.shape[0]
    fa = np.zeros((cap, MAXLEN), np.int32)
    fb = np.zeros((cap, MAXLEN), np.int32)
    fal = np.zeros(cap, np.int32)
    fbl = np.zeros(cap, np.int32)
    na = np.zeros((cap, MAXLEN), np.int32)
    nb = np.zeros((cap, MAXLEN), np.int32)
    nal = np.zeros(cap, np.int32)
    nbl = np.zeros(cap, np.int32)
    for i in range(al0):
        fa[0, i] = a0[i]
    for i in range(bl0):
        fb[0, i] = b0[i]
    fal[0] = al0
    fbl[0] = bl0
    nf = 1
    npieces = 0
    nr = R.shape[0]
    ca = np.zeros((nr, MAXLEN), np.int32)
    cb = np.zeros((nr, MAXLEN), np.int32)
    pend = np.zeros(4 * MAXLEN, np.int32)
    x3 = np.zeros(MAXLEN, np.int32)
    y3 = np.zeros(MAXLEN, np.int32)
    mv = np.zeros(MAXLEN, np.int32)
    lens = np.zeros(3, np.int32)
    tbuf = np.zeros(MAXLEN, np.int32)
    step = np.zeros(n, np.int32)
    shape_into(R[0], Rlen, dims, n, step)
    for level in range(levels):
        nn = 0
        for f in range(nf):
            if npieces >= cap:
                return ERR_CAPACITY
            err = make_piece(fa[f], fal[f], fb[f], fbl[f], n, lam, dims, kind, out1, out2,
                             contains, layers, layer_len, x3, y3, mv, lens)
            if err != 0:
                return err
            for i in range(lens[0]):
                src[npieces, i] = x3[i]
            for i in range(lens[1]):
                tgt[npieces, i] = y3[i]
            for i in range(lens[2]):
                mov[npieces, i] = mv[i]
            srcl[npieces] = lens[0]
            tgtl[npieces] = lens[1]
            movl[npieces] = lens[2]
            lev[npieces] = level
            npieces += 1
            if level + 1 == levels:
                # nothing left to pair: check membership directly
                if not is_child(fa[f], fal[f], x3, lens[0], step, n, lam, dims, kind, out1, out2, tbuf, pend):
                    return ERR_X3_NOT_CHILD
                if not is_child(fb[f], fbl[f], y3, lens[1], step, n, lam, dims, kind, out1, out2, tbuf, pend):
                    return ERR_Y3_NOT_CHILD
                continue
            # refine both cylinders, locate the used children, pair the rest
            cnta = children(fa[f], fal[f], R, Rlen, dims, n, kind, out1, out2, ca, pend)
            cntb = children(fb[f], fbl[f], R, Rlen, dims, n, kind, out1, out2, cb, pend)
            if cnta < 0:
                return cnta
            if cntb < 0:
                return cntb
            if cnta != K or cntb != K:
                return ERR_K_CHANGED
            ia = -1
            for c in range(cnta):
                if lens[0] != fal[f] + Rlen:
                    break
                same = True
                for i in range(lens[0]):
                    if ca[c, i] != x3[i]:
                        same = False
                        break
                if same:
                    ia = c
                    break
            if ia < 0:
                return ERR_X3_NOT_CHILD
            ib = -1
            for c in range(cntb):
                if lens[1] != fbl[f] + Rlen:
                    break
                same = True
                for i in range(lens[1]):
                    if cb[c, i] != y3[i]:
                        same = False
                        break
                if same:
                    ib = c
                    break
            if ib < 0:
                return ERR_Y3_NOT_CHILD
            ja = 0
            jb = 0
            while True:
                if ja == ia:
                    ja += 1
                if jb == ib:
                    jb += 1
                if ja >= cnta or jb >= cntb:
                    break
                if nn >= cap:
                    return ERR_CAPACITY
                L = fal[f] + Rlen
                for i in range(L):
                    na[nn, i] = ca[ja, i]
                nal[nn] = L
                L = fbl[f] + Rlen
                for i in range(L):
                    nb[nn, i] = cb[jb, i]
                nbl[nn] = L
                nn += 1
                ja += 1
                jb += 1
        for r in range(nn):
            for i in range(nal[r]):
                fa[r, i] = na[r, i]
            for i in range(nbl[r]):
                fb[r, i] = nb[r, i]
            fal[r] = nal[r]
            fbl[r] = nbl[r]
        nf = nn
    return npieces
