"""Pure-Python implementations of the compiled kernels.

Same signatures and semantics as ``_ckernels`` except that they work on any
integer dtype (int64 or object) and never overflow.
"""

from __future__ import annotations

import numpy as np


def shift_accumulate(src, dst, dq, dz, coef):
    rs, ws = src.shape
    rd = dst.shape[0]
    for t in range(len(dq)):
        q0, z0, c = int(dq[t]), int(dz[t]), coef[t]
        if q0 >= rd:
            continue
        n = min(rs, rd - q0)
        if c == 1:
            dst[q0:q0 + n, z0:z0 + ws] += src[:n]
        elif c == -1:
            dst[q0:q0 + n, z0:z0 + ws] -= src[:n]
        else:
            dst[q0:q0 + n, z0:z0 + ws] += src[:n] * c


def _max_abs(x):
    if x.size == 0:
        return 0
    return max(abs(int(x.max())), abs(int(x.min())))


def conv2d(a, b, rows):
    ra, wa = a.shape
    rb, wb = b.shape
    W = wa + wb - 1
    out = np.zeros((rows, max(W, 0)), dtype=np.int64)
    if wa == 0 or wb == 0 or rows <= 0:
        return out
    # np.convolve wraps silently on int64, so check the worst case first
    bound = _max_abs(a) * _max_abs(b) * min(a.size, b.size)
    if bound >= 1 << 62 or a.dtype == object or b.dtype == object:
        out = out.astype(object)
        a, b = a.astype(object), b.astype(object)
    for n1 in range(min(ra, rows)):
        for n2 in range(min(rb, rows - n1)):
            out[n1 + n2] += np.convolve(a[n1], b[n2])
    return out


def poly_divmod(a, b):
    la, lb = len(a), len(b)
    d = lb - 1
    rem = [int(x) for x in a]
    bl = [int(x) for x in b]
    lead = bl[-1]
    lq = la - d if la > d else 0
    quo = [0] * lq
    nz = [(j, bj) for j, bj in enumerate(bl) if bj]
    for i in range(la - 1, d - 1, -1):
        c = rem[i] * lead
        quo[i - d] = c
        if c:
            base = i - d
            for j, bj in nz:
                rem[base + j] -= c * bj
    return np.array(quo, dtype=object), np.array(rem[:d], dtype=object)
