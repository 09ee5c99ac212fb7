# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""int64 kernels with overflow detection.

Every routine raises OverflowError as soon as an intermediate value leaves
the int64 range; the dispatcher then reruns the operation on Python ints.
"""

cimport cython
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    static inline int pm_mul_ovf(long long a, long long b, long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    static inline int pm_add_ovf(long long a, long long b, long long *r) {
        return __builtin_add_overflow(a, b, r);
    }
    static inline int pm_sub_ovf(long long a, long long b, long long *r) {
        return __builtin_sub_overflow(a, b, r);
    }
    """
    int pm_mul_ovf(long long a, long long b, long long *r) nogil
    int pm_add_ovf(long long a, long long b, long long *r) nogil
    int pm_sub_ovf(long long a, long long b, long long *r) nogil


def shift_accumulate(const long long[:, ::1] src, long long[:, ::1] dst,
                     const long long[::1] dq, const long long[::1] dz,
                     const long long[::1] coef):
    """dst[n + dq[t], j + dz[t]] += coef[t] * src[n, j] (rows past dst dropped)."""
    cdef Py_ssize_t nt = dq.shape[0]
    cdef Py_ssize_t rs = src.shape[0], ws = src.shape[1]
    cdef Py_ssize_t rd = dst.shape[0]
    cdef Py_ssize_t t, n, j, row, col
    cdef long long c, prod, acc
    cdef int bad = 0
    with nogil:
        for t in range(nt):
            c = coef[t]
            for n in range(rs):
                row = n + dq[t]
                if row >= rd:
                    break
                col = dz[t]
                for j in range(ws):
                    if src[n, j] != 0:
                        if pm_mul_ovf(c, src[n, j], &prod):
                            bad = 1
                            break
                        if pm_add_ovf(dst[row, col + j], prod, &acc):
                            bad = 1
                            break
                        dst[row, col + j] = acc
                if bad:
                    break
            if bad:
                break
    if bad:
        raise OverflowError("int64 overflow in shift_accumulate")


def conv2d(const long long[:, ::1] a, const long long[:, ::1] b, Py_ssize_t rows):
    """Truncated 2D convolution: out[n, j] = sum a[n1, j1] b[n - n1, j - j1]."""
    cdef Py_ssize_t ra = a.shape[0], wa = a.shape[1]
    cdef Py_ssize_t rb = b.shape[0], wb = b.shape[1]
    cdef Py_ssize_t W = wa + wb - 1
    out_arr = np.zeros((rows, W if W > 0 else 0), dtype=np.int64)
    if wa == 0 or wb == 0 or rows <= 0:
        return out_arr
    cdef long long[:, ::1] out = out_arr
    cdef Py_ssize_t n1, n2, j1, j2
    cdef long long x, prod, acc
    cdef int bad = 0
    with nogil:
        for n1 in range(ra):
            if n1 >= rows:
                break
            for j1 in range(wa):
                x = a[n1, j1]
                if x == 0:
                    continue
                for n2 in range(rb):
                    if n1 + n2 >= rows:
                        break
                    for j2 in range(wb):
                        if b[n2, j2] != 0:
                            if pm_mul_ovf(x, b[n2, j2], &prod):
                                bad = 1
                                break
                            if pm_add_ovf(out[n1 + n2, j1 + j2], prod, &acc):
                                bad = 1
                                break
                            out[n1 + n2, j1 + j2] = acc
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
    if bad:
        raise OverflowError("int64 overflow in conv2d")
    return out_arr


def poly_divmod(const long long[::1] a, const long long[::1] b):
    """Divide a by b (lowest degree first), b[-1] = +-1.

    Returns (quotient, remainder) arrays with len(remainder) = len(b) - 1.
    """
    cdef Py_ssize_t la = a.shape[0], lb = b.shape[0]
    cdef Py_ssize_t d = lb - 1
    cdef Py_ssize_t lq = la - d if la > d else 0
    rem_arr = np.array(a, dtype=np.int64)
    quo_arr = np.zeros(lq, dtype=np.int64)
    cdef long long[::1] rem = rem_arr
    cdef long long[::1] quo = quo_arr
    cdef long long lead = b[lb - 1]
    cdef Py_ssize_t i, j
    cdef long long c, prod, acc
    cdef int bad = 0
    with nogil:
        i = la - 1
        while i >= d:
            c = rem[i] * lead
            quo[i - d] = c
            if c != 0:
                for j in range(lb):
                    if b[j] != 0:
                        if pm_mul_ovf(c, b[j], &prod):
                            bad = 1
                            break
                        if pm_sub_ovf(rem[i - d + j], prod, &acc):
                            bad = 1
                            break
                        rem[i - d + j] = acc
                if bad:
                    break
            i -= 1
    if bad:
        raise OverflowError("int64 overflow in poly_divmod")
    return quo_arr, rem_arr[:d].copy() if d > 0 else np.zeros(0, dtype=np.int64)


cdef struct DfsCtx:
    Py_ssize_t n, T, L
    long long count
    long long bound_sq
    const long long* y
    const long long* w
    const long long* b
    const long long* bn        # prefix min of b/w: numerator
    const long long* bd
    const long long* vals      # n x T
    const long long* vnum      # n x T  (prefix max of vals/w: numerator)
    const long long* vden      # n x T
    const long long* lagr      # n x T x L (prefix max of (vals << 8) - lam * w)
    const long long* lam       # T x L
    const unsigned char* reach # (count+1) x n x (total+1), or n x (total+1)
    Py_ssize_t total
    long long* acc_idx
    long long* part_stack      # depth x T


cdef inline bint _reach(DfsCtx* c, long long parts, Py_ssize_t idx, long long rem) noexcept nogil:
    if c.count < 0:
        return c.reach[idx * (c.total + 1) + rem] != 0
    return c.reach[(parts * c.n + idx) * (c.total + 1) + rem] != 0


cdef int _dfs(DfsCtx* c, long long rem, Py_ssize_t idx, long long parts, long long bsum,
              Py_ssize_t depth, list out) except -1:
    cdef Py_ssize_t t, l, j, i
    cdef long long bn, bd, tt, cap, best, val, w
    cdef const long long* part = c.part_stack + depth * c.T
    cdef long long* child
    if rem == 0 and (c.count < 0 or parts == 0):
        out.append([c.acc_idx[i] for i in range(depth)])
        return 0
    if idx < 0:
        return 0
    if c.count >= 0 and parts == 0:
        return 0
    if not _reach(c, parts, idx, rem):
        return 0
    if c.bound_sq >= 0:
        bn = c.bn[idx]
        bd = c.bd[idx]
        tt = bsum * bd + rem * bn
        if tt >= 0 and tt * tt >= c.bound_sq * bd * bd:
            return 0
        if c.count >= 0:
            cap = c.y[idx]
            tt = (bsum + parts) * (cap + 1) + rem - parts
            if tt >= 0 and tt * tt >= c.bound_sq * (cap + 1) * (cap + 1):
                return 0
        if c.vals != NULL:
            for t in range(c.T):
                if c.count < 0:
                    if part[t] * c.vden[idx * c.T + t] + rem * c.vnum[idx * c.T + t] <= 0:
                        return 0
                else:
                    best = 0
                    for l in range(c.L):
                        val = (part[t] << 8) + parts * c.lagr[(idx * c.T + t) * c.L + l] \
                            + rem * c.lam[t * c.L + l]
                        if l == 0 or val < best:
                            best = val
                    if best <= 0:
                        return 0
    for j in range(idx, -1, -1):
        w = c.w[j]
        if w > rem:
            continue
        if c.count >= 0 and rem - w > (parts - 1) * w:
            break
        c.acc_idx[depth] = j
        if c.vals != NULL:
            child = c.part_stack + (depth + 1) * c.T
            for t in range(c.T):
                child[t] = part[t] + c.vals[j * c.T + t]
        _dfs(c, rem - w, j, parts - 1 if c.count >= 0 else 0, bsum + c.b[j], depth + 1, out)
    return 0


def dfs_multisets(const long long[::1] y, const long long[::1] w, const long long[::1] b,
                  const long long[::1] bn, const long long[::1] bd, vals, vnum, vden,
                  lagr, lam, const unsigned char[::1] reach, long long total,
                  long long count, long long bound_sq, long long start_b, base):
    """Depth-first multiset search; see ``theta._Search`` for the semantics.

    Returns index tuples into the item arrays (largest index first).
    """
    cdef DfsCtx c
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t T = 0, L = 0
    cdef Py_ssize_t maxdepth
    cdef const long long[:, ::1] vals_v
    cdef const long long[:, ::1] vnum_v
    cdef const long long[:, ::1] vden_v
    cdef const long long[:, :, ::1] lagr_v
    cdef const long long[:, ::1] lam_v
    cdef const long long[::1] base_v
    out = []
    if n == 0:
        return out
    c.n = n
    c.count = count
    c.bound_sq = bound_sq
    c.y = &y[0]
    c.w = &w[0]
    c.b = &b[0]
    c.bn = &bn[0]
    c.bd = &bd[0]
    c.reach = &reach[0]
    c.total = total
    c.vals = NULL
    c.vnum = NULL
    c.vden = NULL
    c.lagr = NULL
    c.lam = NULL
    if vals is not None:
        vals_v = vals
        T = vals_v.shape[1]
        c.vals = &vals_v[0, 0]
        if count < 0:
            vnum_v = vnum
            vden_v = vden
            c.vnum = &vnum_v[0, 0]
            c.vden = &vden_v[0, 0]
        else:
            lagr_v = lagr
            lam_v = lam
            L = lam_v.shape[1]
            c.lagr = &lagr_v[0, 0, 0]
            c.lam = &lam_v[0, 0]
    c.T = T
    c.L = L
    maxdepth = total // w[0] + 2 if count < 0 else count + 2
    acc_arr = np.zeros(maxdepth, dtype=np.int64)
    stack_arr = np.zeros((maxdepth + 1) * (T if T else 1), dtype=np.int64)
    cdef long long[::1] acc_v = acc_arr
    cdef long long[::1] stack_v = stack_arr
    c.acc_idx = &acc_v[0]
    c.part_stack = &stack_v[0]
    if T:
        base_v = base
        for t in range(T):
            stack_v[t] = base_v[t]
    _dfs(&c, total, n - 1, count if count >= 0 else 0, start_b, 0, out)
    return out
