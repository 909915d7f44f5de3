"""Bit-packed row kernels for the closure and subset-sum dynamic programs.

A grid over a box with extents ``(E_1, ..., E_d)`` is stored as ``R`` rows of
``W`` little-endian uint64 words, where ``R = E_1 * ... * E_{d-1}`` and each
row holds the ``E_d`` cells of the last axis.  Bits at positions ``>= E_d``
are kept zero.  Rows are addressed by the row-major rank of their prefix
``(x_1, ..., x_{d-1})``; subtracting a generator's prefix rank from a row
index gives the source row whenever the prefix difference is nonnegative.
"""
from __future__ import annotations

import sys

import numpy as np
from numba import njit

_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)
_ZERO = np.uint64(0)


def words_for(nbits: int) -> int:
    return (nbits + 63) // 64


def last_word_mask(nbits: int) -> np.uint64:
    r = nbits % 64
    return _ONES if r == 0 else np.uint64((1 << r) - 1)


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a C-ordered bool array of shape ``extents`` into ``(R, W)`` words."""
    nbits = bits.shape[-1]
    rows = bits.reshape(-1, nbits)
    W = words_for(nbits)
    packed = np.packbits(rows, axis=1, bitorder="little")
    buf = np.zeros((rows.shape[0], W * 8), dtype=np.uint8)
    buf[:, : packed.shape[1]] = packed
    return buf.view("<u8").astype(np.uint64, copy=False)


def unpack_rows(words: np.ndarray, extents: tuple[int, ...]) -> np.ndarray:
    nbits = extents[-1]
    raw = np.ascontiguousarray(words).astype("<u8", copy=False).view(np.uint8)
    bits = np.unpackbits(raw, axis=1, bitorder="little")[:, :nbits]
    return np.ascontiguousarray(bits.astype(bool)).reshape(extents)


def prefix_table(extents: tuple[int, ...]) -> np.ndarray:
    """Prefix coordinates of every row, shape ``(R, max(d-1, 1))``."""
    pre = extents[:-1]
    if not pre:
        return np.zeros((1, 1), dtype=np.int64)
    return np.indices(pre).reshape(len(pre), -1).T.astype(np.int64).copy()


def prefix_strides(extents: tuple[int, ...]) -> np.ndarray:
    pre = extents[:-1]
    if not pre:
        return np.ones(1, dtype=np.int64)
    s = np.ones(len(pre), dtype=np.int64)
    for i in range(len(pre) - 2, -1, -1):
        s[i] = s[i + 1] * pre[i + 1]
    return s


@njit(cache=True, inline="always")
def _shifted_word(src, j, ws, bs):
    # word j of (src << (64*ws + bs)), reading only src[j-ws] and src[j-ws-1]
    k = j - ws
    v = src[k] << np.uint64(bs)
    if bs != 0 and k >= 1:
        v |= src[k - 1] >> np.uint64(64 - bs)
    return v


@njit(cache=True)
def or_shift(dst, src, s, lastmask):
    """``dst |= src << s`` on one packed row; safe when ``dst`` is ``src``."""
    W = dst.shape[0]
    ws = s // 64
    bs = s % 64
    if ws >= W:
        return
    for j in range(W - 1, ws - 1, -1):
        dst[j] |= _shifted_word(src, j, ws, bs)
    dst[W - 1] &= lastmask


@njit(cache=True)
def _row_full(row, lastmask):
    W = row.shape[0]
    for j in range(W - 1):
        if row[j] != np.uint64(0xFFFFFFFFFFFFFFFF):
            return False
    return row[W - 1] == lastmask


@njit(cache=True)
def _prefix_leq(prefix, a, b):
    for k in range(prefix.shape[1]):
        if prefix[a, k] > prefix[b, k]:
            return False
    return True


@njit(cache=True)
def semigroup_closure(rows, nbits, prefix, pt_row, pt_last):
    """Fill ``rows`` with the in-box closure of the given generators.

    Generators are given as (row, last-coordinate) pairs sorted by row-major
    rank.  Row 0 is the 1-d semigroup of the last-axis generators; every
    other row is the union of ``row[r - g_row] << g_last`` over generators
    with nonzero prefix dominated by row ``r``'s prefix.  A generator is
    kept (flagged minimal) only if it is not already in the closure of the
    generators preceding it, which is exactly indecomposability.
    Returns the boolean minimality flags.
    """
    R = rows.shape[0]
    n = pt_row.shape[0]
    lastmask = np.uint64(0xFFFFFFFFFFFFFFFF)
    if nbits % 64 != 0:
        lastmask = np.uint64((1 << (nbits % 64)) - 1)
    minimal = np.zeros(n, dtype=np.bool_)
    gen_row = np.empty(n, dtype=np.int64)
    gen_last = np.empty(n, dtype=np.int64)
    ngen = 0
    rows[0, 0] |= np.uint64(1)
    i = 0
    # row 0: 1-d closure, unbounded repetition by doubling shifts
    while i < n and pt_row[i] == 0:
        s = pt_last[i]
        if s != 0 and not ((rows[0, s // 64] >> np.uint64(s % 64)) & np.uint64(1)):
            minimal[i] = True
            step = s
            while step < nbits:
                or_shift(rows[0], rows[0], step, lastmask)
                step *= 2
        i += 1
    for r in range(1, R):
        row = rows[r]
        full = False
        for g in range(ngen):
            gr = gen_row[g]
            if gr > r:
                break
            if not _prefix_leq(prefix, gr, r):
                continue
            or_shift(row, rows[r - gr], gen_last[g], lastmask)
            if _row_full(row, lastmask):
                full = True
                break
        while i < n and pt_row[i] == r:
            s = pt_last[i]
            if not full and not ((row[s // 64] >> np.uint64(s % 64)) & np.uint64(1)):
                minimal[i] = True
                gen_row[ngen] = r
                gen_last[ngen] = s
                ngen += 1
                or_shift(row, rows[0], s, lastmask)
                full = _row_full(row, lastmask)
            i += 1
    return minimal


@njit(cache=True)
def _highest_gap(row, j, lastmask):
    # highest zero bit in word j, or -1 if the word is full
    w = row[j]
    m = np.uint64(0xFFFFFFFFFFFFFFFF)
    if j == row.shape[0] - 1:
        m = lastmask
    inv = (~w) & m
    if inv == np.uint64(0):
        return -1
    b = 63
    while not ((inv >> np.uint64(b)) & np.uint64(1)):
        b -= 1
    return j * 64 + b


@njit(cache=True)
def _word_full(row, j, lastmask):
    if j == row.shape[0] - 1:
        return row[j] == lastmask
    return row[j] == np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True)
def _suffix_max(top, prefix_ext, pstride, out):
    # out[r] = max top[r'] over rows whose prefix dominates row r's prefix
    R = top.shape[0]
    npre = pstride.shape[0]
    for r in range(R - 1, -1, -1):
        v = top[r]
        rem = r
        for k in range(npre):
            c = rem // pstride[k]
            rem = rem % pstride[k]
            if c + 1 < prefix_ext[k]:
                w = out[r + pstride[k]]
                if w > v:
                    v = w
        out[r] = v


@njit(cache=True)
def subset_sums(rows, nbits, prefix, prefix_ext, pstride, el_row, el_last):
    """Fill ``rows`` with the in-box subset sums of the given elements.

    Each element ``a`` is applied as the 0/1 update ``grid |= grid << a``,
    rows processed from the top so sources are read before they change.
    Elements that no current gap dominates are skipped: gaps only shrink,
    so such an element can never contribute.  Per-row bookkeeping (nonzero
    word span, gap word span, highest gap) bounds the words touched.
    """
    R = rows.shape[0]
    W = rows.shape[1]
    lastmask = np.uint64(0xFFFFFFFFFFFFFFFF)
    if nbits % 64 != 0:
        lastmask = np.uint64((1 << (nbits % 64)) - 1)
    lo = np.full(R, -1, dtype=np.int64)    # lowest nonzero word
    hi = np.full(R, -1, dtype=np.int64)    # highest nonzero word
    glo = np.zeros(R, dtype=np.int64)      # lowest word with a gap
    ghi = np.full(R, W - 1, dtype=np.int64)  # highest word with a gap
    top = np.full(R, nbits - 1, dtype=np.int64)
    rows[0, 0] |= np.uint64(1)
    lo[0] = 0
    hi[0] = 0
    if nbits == 1:
        glo[0] = 1
        ghi[0] = 0
        top[0] = -1
    sm = np.empty(R, dtype=np.int64)
    _suffix_max(top, prefix_ext, pstride, sm)
    dirty = False
    for e in range(el_row.shape[0]):
        ar = el_row[e]
        s = el_last[e]
        if sm[ar] < s:
            continue
        if dirty:
            _suffix_max(top, prefix_ext, pstride, sm)
            dirty = False
            if sm[ar] < s:
                continue
        ws = s // 64
        bs = s % 64
        for r in range(R - 1, ar - 1, -1):
            if glo[r] > ghi[r] or top[r] < s:
                continue
            if not _prefix_leq(prefix, ar, r):
                continue
            src_i = r - ar
            if hi[src_i] < 0:
                continue
            j_lo = lo[src_i] + ws
            if glo[r] > j_lo:
                j_lo = glo[r]
            j_hi = hi[src_i] + ws
            if bs != 0:
                j_hi += 1
            if ghi[r] < j_hi:
                j_hi = ghi[r]
            if j_hi > W - 1:
                j_hi = W - 1
            if j_lo > j_hi:
                continue
            src = rows[src_i]
            dst = rows[r]
            changed = False
            for j in range(j_hi, j_lo - 1, -1):
                v = _shifted_word(src, j, ws, bs)
                if j == W - 1:
                    v &= lastmask
                nv = dst[j] | v
                if nv != dst[j]:
                    dst[j] = nv
                    changed = True
            if not changed:
                continue
            dirty = True
            for j in range(j_lo, j_hi + 1):
                if dst[j] != np.uint64(0):
                    if lo[r] < 0 or j < lo[r]:
                        lo[r] = j
                    break
            for j in range(j_hi, j_lo - 1, -1):
                if dst[j] != np.uint64(0):
                    if j > hi[r]:
                        hi[r] = j
                    break
            while glo[r] <= ghi[r] and _word_full(dst, glo[r], lastmask):
                glo[r] += 1
            while ghi[r] >= glo[r] and _word_full(dst, ghi[r], lastmask):
                ghi[r] -= 1
            if glo[r] > ghi[r]:
                top[r] = -1
            else:
                top[r] = _highest_gap(dst, ghi[r], lastmask)


@njit(cache=True)
def doubling_closure_1d(row, gens, nbits):
    """In-place 1-d closure ``row := row + <gens>`` on one packed row."""
    lastmask = np.uint64(0xFFFFFFFFFFFFFFFF)
    if nbits % 64 != 0:
        lastmask = np.uint64((1 << (nbits % 64)) - 1)
    for g in gens:
        if g <= 0 or g >= nbits:
            continue
        step = g
        while step < nbits:
            or_shift(row, row, step, lastmask)
            step *= 2


if sys.byteorder != "little":  # pragma: no cover
    raise ImportError("packed kernels assume a little-endian host")
