"""Kronecker substitution for exact dense integer polynomial arithmetic.

A bivariate block ``X[n, j]`` (rows indexed by the power of q, columns by a
shifted power of zeta) is flattened with a fixed row stride ``W`` into a
univariate polynomial, which is in turn evaluated at ``2**s``.  A single big
integer product then yields every coefficient of the product block.  With
gmpy2 available the big integer work runs in GMP; otherwise Python ints are
used and everything stays exact, only slower.
"""

from __future__ import annotations

import numpy as np

try:
    import gmpy2

    _mpz = gmpy2.mpz
    _mod2exp = gmpy2.f_mod_2exp
    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    gmpy2 = None
    _mpz = int
    HAVE_GMPY2 = False

    def _mod2exp(x, n):
        return x & ((1 << n) - 1)


_TOP = np.uint64(1 << 63)


def _as_int_list(vals):
    if isinstance(vals, np.ndarray):
        return vals.ravel().tolist()
    return list(vals)


def max_bits(vals) -> int:
    """Bit length of the largest absolute value in ``vals`` (0 for all zero)."""
    if isinstance(vals, np.ndarray) and vals.dtype == np.int64:
        if vals.size == 0:
            return 0
        hi = int(vals.max())
        lo = int(vals.min())
        return max(abs(hi), abs(lo)).bit_length()
    best = 0
    for v in _as_int_list(vals):
        if v:
            b = int(v).bit_length() if v > 0 else int(-v).bit_length()
            if b > best:
                best = b
    return best


def _slot_bits(bits: int) -> int:
    # slots are whole 64-bit limbs; one spare bit keeps the biased unpack exact
    return 64 * ((bits + 1 + 63) // 64)


def pack(vals, s: int):
    """Return ``sum(vals[i] * 2**(s*i))`` as an mpz (or int)."""
    limbs = s // 64
    if isinstance(vals, np.ndarray) and vals.dtype == np.int64 and (
            vals.size == 0 or vals.min() > np.iinfo(np.int64).min):
        v = vals.ravel()
        n = v.size
        pos = np.zeros((n, limbs), dtype=np.uint64)
        neg = np.zeros((n, limbs), dtype=np.uint64)
        pos[:, 0] = np.where(v > 0, v, 0).astype(np.uint64)
        neg[:, 0] = np.where(v < 0, -v, 0).astype(np.uint64)
        P = int.from_bytes(pos.tobytes(), "little")
        M = int.from_bytes(neg.tobytes(), "little")
        return _mpz(P) - _mpz(M)
    v = _as_int_list(vals.ravel() if isinstance(vals, np.ndarray) else vals)
    nb = s // 8
    zero = bytes(nb)
    pos = []
    neg = []
    for x in v:
        x = int(x)
        if x > 0:
            pos.append(x.to_bytes(nb, "little"))
            neg.append(zero)
        elif x < 0:
            pos.append(zero)
            neg.append((-x).to_bytes(nb, "little"))
        else:
            pos.append(zero)
            neg.append(zero)
    P = int.from_bytes(b"".join(pos), "little")
    M = int.from_bytes(b"".join(neg), "little")
    return _mpz(P) - _mpz(M)


_BIAS_CACHE: dict = {}


def _bias(s: int, K: int):
    key = (s, K)
    b = _BIAS_CACHE.get(key)
    if b is None:
        slot = bytearray(s // 8)
        slot[-1] = 0x80
        b = _mpz(int.from_bytes(bytes(slot) * K, "little"))
        if len(_BIAS_CACHE) > 64:
            _BIAS_CACHE.clear()
        _BIAS_CACHE[key] = b
    return b


def unpack(Z, s: int, K: int) -> np.ndarray:
    """Inverse of :func:`pack` for ``K`` signed slots with ``|c| < 2**(s-1)``.

    Returns an int64 array when every value fits, else an object array.
    """
    if K == 0:
        return np.zeros(0, dtype=np.int64)
    limbs = s // 64
    Zb = _mod2exp(Z + _bias(s, K), s * K)
    raw = int(Zb).to_bytes(s * K // 8, "little")
    arr = np.frombuffer(raw, dtype=np.uint64).reshape(K, limbs)
    if limbs == 1:
        return (arr[:, 0] ^ _TOP).view(np.int64).copy()
    top = arr[:, limbs - 1]
    mid = arr[:, 1:limbs - 1]
    low = arr[:, 0]
    nonneg = (top == _TOP) & (low < _TOP)
    negv = (top == _TOP - np.uint64(1)) & (low >= _TOP)
    if limbs > 2:
        nonneg &= np.all(mid == 0, axis=1)
        negv &= np.all(mid == np.uint64(0xFFFFFFFFFFFFFFFF), axis=1)
    small = nonneg | negv
    out_small = low.view(np.int64)
    if small.all():
        return out_small.copy()
    res = out_small.astype(object)
    half = 1 << (s - 1)
    nb = s // 8
    for i in np.nonzero(~small)[0].tolist():
        res[i] = int.from_bytes(raw[i * nb:(i + 1) * nb], "little") - half
    return res


def flatten(block: np.ndarray, W: int) -> np.ndarray:
    """Lay out the rows of ``block`` with stride ``W`` (zero padded)."""
    r, w = block.shape
    if block.dtype == np.int64:
        flat = np.zeros((r, W), dtype=np.int64)
    else:
        flat = np.empty((r, W), dtype=object)
        flat[:] = 0
    flat[:, :w] = block
    return flat.ravel()


def mul_flat(fa, fb, K: int) -> np.ndarray:
    """First ``K`` coefficients of the product of two flat vectors."""
    if K <= 0:
        return np.zeros(0, dtype=np.int64)
    if len(fa) == 0 or len(fb) == 0:
        return np.zeros(K, dtype=np.int64)
    bits = max_bits(fa) + max_bits(fb) + (min(len(fa), len(fb)) + 1).bit_length()
    s = _slot_bits(bits)
    return unpack(pack(fa, s) * pack(fb, s), s, K)


def mul_2d(A: np.ndarray, B: np.ndarray, rows: int) -> np.ndarray:
    """Truncated product of two blocks, keeping ``rows`` rows.

    Column ``j`` of the result collects column pairs with index sum ``j``.
    """
    ra, wa = A.shape
    rb, wb = B.shape
    W = wa + wb - 1
    if rows <= 0 or wa == 0 or wb == 0:
        return np.zeros((max(rows, 0), max(W, 0)), dtype=np.int64)
    fa = flatten(A[:rows], W)
    fb = flatten(B[:rows], W)
    return mul_flat(fa, fb, rows * W).reshape(rows, W)


def _inverse_2adic(Y, nbits: int):
    """Inverse of odd ``Y`` modulo ``2**nbits`` by Newton iteration."""
    y = _mpz(1)
    prec = 1
    while prec < nbits:
        prec = min(2 * prec, nbits)
        y = _mod2exp(y * (2 - _mod2exp(_mod2exp(Y, prec) * y, prec)), prec)
    return y


def div_flat(fa, fb, K: int, p0: int, bits: int) -> np.ndarray:
    """2-adic quotient of flat vectors: first ``K`` coefficients of fa/fb.

    ``fb[p0]`` must be +-1 and ``fb[:p0]`` zero; ``fa[:p0]`` must vanish.
    Coefficients of the true quotient are assumed to fit in ``bits`` bits;
    the caller verifies the result.
    """
    s = _slot_bits(max(bits, max_bits(fa), max_bits(fb)))
    X = pack(fa, s) >> (s * p0)
    Y = pack(fb, s) >> (s * p0)
    nbits = s * K
    Z = _mod2exp(X * _inverse_2adic(_mod2exp(Y, nbits), nbits), nbits)
    return unpack(Z, s, K)
