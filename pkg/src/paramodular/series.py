r"""Exact Laurent polynomials in zeta and truncated Laurent series in q.

Two carriers are defined here:

* :class:`LaurentPoly` -- a finitely supported map ``exponent -> coefficient``
  over the integers or the rationals, stored densely between its lowest and
  highest exponent.
* :class:`QSeriesTrunc` -- ``q**offset * sum_{n=0}^{L} c_n(zeta) q**n`` with
  a rational ``offset`` and LaurentPoly coefficients ``c_n``.  Internally the
  coefficients live in one integer block (rows = powers of q, columns = a
  window of zeta exponents) together with a common denominator, so that bulk
  products and quotients run on integer kernels.

Every operation is exact.  Bulk products use either the compiled int64
kernels or Kronecker substitution over GMP integers, whichever is cheaper;
see :mod:`paramodular.kernels` and :mod:`paramodular._kron`.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np

from . import _kron, kernels

__all__ = [
    "LaurentPoly",
    "QSeriesTrunc",
    "NotDivisible",
    "lp_divide",
    "cyclotomic",
    "series_mul_pow",
    "series_divide",
    "power_series_pow",
]


class NotDivisible(ArithmeticError):
    """Raised when an exact division leaves a nonzero remainder.

    ``q_index`` is the absolute power of q at which the remainder appeared
    (None for a plain LaurentPoly division).
    """

    def __init__(self, message: str, q_index=None):
        super().__init__(message)
        self.q_index = q_index


def _norm(c):
    """Canonical exact scalar: int when integral, Fraction otherwise."""
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        c = Fraction(c.numerator, c.denominator)
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, np.integer):
        return int(c)
    raise TypeError(f"not an exact rational: {c!r}")


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _den_of(vals) -> int:
    d = 1
    for v in vals:
        if isinstance(v, Fraction):
            d = _lcm(d, v.denominator)
    return d


# ---------------------------------------------------------------------------
# LaurentPoly
# ---------------------------------------------------------------------------


class LaurentPoly:
    """Exact Laurent polynomial in one variable (zeta).

    ``LaurentPoly({-1: 1, 0: 2, 1: 1})`` is ``zeta^-1 + 2 + zeta``.  Values
    are immutable; zero coefficients are never stored.
    """

    __slots__ = ("_lo", "_c", "_int", "_hash")

    def __init__(self, terms: Mapping[int, object] | None = None):
        if not terms:
            self._set(0, ())
            return
        items = {int(e): _norm(c) for e, c in terms.items()}
        items = {e: c for e, c in items.items() if c != 0}
        if not items:
            self._set(0, ())
            return
        lo, hi = min(items), max(items)
        self._set(lo, tuple(items.get(e, 0) for e in range(lo, hi + 1)))

    def _set(self, lo, coeffs):
        self._lo = lo
        self._c = coeffs
        self._int = all(type(c) is int for c in coeffs)
        self._hash = None

    @classmethod
    def _make(cls, lo: int, coeffs) -> "LaurentPoly":
        """Build from a dense coefficient list starting at exponent ``lo``."""
        c = [_norm(x) for x in coeffs]
        i, j = 0, len(c)
        while i < j and c[i] == 0:
            i += 1
        while j > i and c[j - 1] == 0:
            j -= 1
        obj = cls.__new__(cls)
        if i == j:
            obj._set(0, ())
        else:
            obj._set(lo + i, tuple(c[i:j]))
        return obj

    @classmethod
    def monomial(cls, e: int, c=1) -> "LaurentPoly":
        return cls._make(e, [c])

    @classmethod
    def constant(cls, c) -> "LaurentPoly":
        return cls._make(0, [c])

    # -- queries -----------------------------------------------------------
    @property
    def terms(self) -> dict:
        return {self._lo + i: c for i, c in enumerate(self._c) if c != 0}

    @property
    def is_integral(self) -> bool:
        return self._int

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self):
        return bool(self._c)

    @property
    def low(self) -> int:
        """Lowest exponent (raises on zero)."""
        if not self._c:
            raise ValueError("zero polynomial has no lowest exponent")
        return self._lo

    @property
    def high(self) -> int:
        if not self._c:
            raise ValueError("zero polynomial has no highest exponent")
        return self._lo + len(self._c) - 1

    @property
    def width(self) -> int:
        return len(self._c)

    def coeff(self, e: int):
        i = e - self._lo
        if 0 <= i < len(self._c):
            return self._c[i]
        return 0

    def dense(self) -> tuple:
        """(lowest exponent, coefficient tuple)."""
        return self._lo, self._c

    def is_unit_monomial(self) -> bool:
        return len(self._c) == 1 and self._c[0] in (1, -1)

    def content_den(self) -> int:
        return _den_of(self._c)

    # -- arithmetic --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self._lo == other._lo and self._c == other._c or (
                not self._c and not other._c)
        if isinstance(other, (int, Fraction)):
            return self == LaurentPoly.constant(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._lo, self._c) if self._c else ())
        return self._hash

    def __neg__(self):
        return LaurentPoly._make(self._lo, [-c for c in self._c])

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.constant(other)
        if not self._c:
            return other
        if not other._c:
            return self
        lo = min(self._lo, other._lo)
        hi = max(self.high, other.high)
        out = [0] * (hi - lo + 1)
        for i, c in enumerate(self._c):
            out[self._lo - lo + i] += c
        for i, c in enumerate(other._c):
            out[other._lo - lo + i] += c
        return LaurentPoly._make(lo, out)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            return _lp_mul(self, other)
        try:
            s = _norm(other)
        except TypeError:
            return NotImplemented
        if s == 0:
            return LaurentPoly()
        return LaurentPoly._make(self._lo, [c * s for c in self._c])

    __rmul__ = __mul__

    def __truediv__(self, other):
        s = _norm(other)
        return LaurentPoly._make(self._lo, [Fraction(c) / s for c in self._c])

    def __pow__(self, e: int):
        if e < 0:
            if not self.is_unit_monomial():
                raise ZeroDivisionError("only unit monomials are invertible")
            return LaurentPoly.monomial(-self._lo * (-e), self._c[0] ** (-e))
        result = LaurentPoly.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def shift(self, j: int) -> "LaurentPoly":
        """Multiply by zeta**j."""
        if not self._c:
            return self
        obj = LaurentPoly.__new__(LaurentPoly)
        obj._set(self._lo + j, self._c)
        return obj

    def subs_power(self, k: int) -> "LaurentPoly":
        """Substitute zeta -> zeta**k (k may be negative)."""
        if k == 0:
            return LaurentPoly.constant(sum(self._c))
        return LaurentPoly({k * e: c for e, c in self.terms.items()})

    def reflect(self) -> "LaurentPoly":
        """zeta -> 1/zeta."""
        if not self._c:
            return self
        return LaurentPoly._make(-self.high, list(reversed(self._c)))

    def value_at_one(self):
        return _norm(sum(self._c)) if self._c else 0

    def __repr__(self):
        if not self._c:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items()):
            if e == 0:
                parts.append(f"{c}")
            elif c == 1:
                parts.append(f"z^{e}")
            elif c == -1:
                parts.append(f"-z^{e}")
            else:
                parts.append(f"{c}*z^{e}")
        return " + ".join(parts).replace("+ -", "- ")


def _int_array(coeffs) -> np.ndarray:
    try:
        return np.array(coeffs, dtype=np.int64)
    except OverflowError:
        return np.array(coeffs, dtype=object)


def _lp_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    if not a._c or not b._c:
        return LaurentPoly()
    la, lb = len(a._c), len(b._c)
    if la * lb <= 256 or not (a._int and b._int):
        if not (a._int and b._int):
            da, db = a.content_den(), b.content_den()
            ia = [int(c * da) for c in a._c]
            ib = [int(c * db) for c in b._c]
            raw = _lp_mul(LaurentPoly._make(0, ia), LaurentPoly._make(0, ib))
            if not raw._c:
                return raw
            d = da * db
            return LaurentPoly._make(a._lo + b._lo + raw._lo,
                                     [Fraction(c, d) for c in raw._c])
        out = [0] * (la + lb - 1)
        for i, x in enumerate(a._c):
            if x:
                for j, y in enumerate(b._c):
                    out[i + j] += x * y
        return LaurentPoly._make(a._lo + b._lo, out)
    prod = _kron.mul_flat(_int_array(a._c), _int_array(b._c), la + lb - 1)
    return LaurentPoly._make(a._lo + b._lo, prod.tolist())


# ---------------------------------------------------------------------------
# Laurent polynomial division
# ---------------------------------------------------------------------------


def _check_divisor(b: LaurentPoly):
    if b.is_zero():
        raise ZeroDivisionError("division by the zero Laurent polynomial")
    lo_c, hi_c = b._c[0], b._c[-1]
    if lo_c not in (1, -1) or hi_c not in (1, -1):
        raise ValueError(
            "divisor must have unit lowest and highest coefficients, got "
            f"{lo_c} and {hi_c}")


def lp_divide(a: LaurentPoly, b: LaurentPoly) -> tuple[LaurentPoly, LaurentPoly]:
    r"""Divide ``a`` by a Laurent polynomial ``b`` with unit extreme coefficients.

    Writing ``b = zeta^lo * bt`` with ``bt`` a true polynomial of degree
    ``d`` (``bt(0) = +-1``), returns the unique ``(Q, R)`` with
    ``a = Q*b + R`` where ``R`` is a true polynomial of degree ``< d``.
    Negative powers of ``a`` are cleared from the bottom using the unit
    constant term of ``bt``, the rest by ordinary long division.
    """
    _check_divisor(b)
    if a.is_zero():
        return LaurentPoly(), LaurentPoly()
    if not b.is_integral:
        return _lp_divide_generic(a, b)
    scale = 1 if a.is_integral else a.content_den()
    A = [int(c * scale) for c in a._c] if scale != 1 else list(a._c)
    bt = list(b._c)
    d = len(bt) - 1
    lo_a = a._lo
    S = []
    if lo_a < 0:
        k = -lo_a
        T = A[:k + d] + [0] * max(0, k + d - len(A))
        quo_r, rem_r = kernels.poly_divmod(_int_array(T[::-1]), _int_array(bt[::-1]))
        S = [int(x) for x in quo_r.tolist()[::-1]]
        tail = [int(x) for x in rem_r.tolist()[::-1]]
        A2 = tail + A[k + d:]
    else:
        A2 = [0] * lo_a + A
    if len(A2) > d:
        q2, r2 = kernels.poly_divmod(_int_array(A2), _int_array(bt))
        q2 = [int(x) for x in q2.tolist()]
        rem = [int(x) for x in r2.tolist()]
    else:
        q2, rem = [], A2
    # quotient relative to bt: exponents lo_a.. for S, 0.. for q2
    if S:
        qcoef = S + q2
        qlo = lo_a
    else:
        qcoef = q2
        qlo = 0
    if scale != 1:
        qcoef = [Fraction(c, scale) for c in qcoef]
        rem = [Fraction(c, scale) for c in rem]
    Q = LaurentPoly._make(qlo - b._lo, qcoef)
    R = LaurentPoly._make(0, rem)
    return Q, R


def _lp_divide_generic(a: LaurentPoly, b: LaurentPoly):
    # rational divisor with unit ends: plain Fraction arithmetic
    bt = [Fraction(c) for c in b._c]
    d = len(bt) - 1
    lead, tail = bt[-1], bt[0]
    coeffs = {e: Fraction(c) for e, c in a.terms.items()}
    quo = {}
    for e in sorted(x for x in coeffs if x < 0):
        c = coeffs.get(e, 0)
        if c:
            f = c / tail
            quo[e] = quo.get(e, 0) + f
            for j, bj in enumerate(bt):
                coeffs[e + j] = coeffs.get(e + j, 0) - f * bj
    top = max(coeffs) if coeffs else 0
    for e in range(top, d - 1, -1):
        c = coeffs.get(e, 0)
        if c:
            f = c / lead
            quo[e - d] = quo.get(e - d, 0) + f
            for j, bj in enumerate(bt):
                coeffs[e - d + j] = coeffs.get(e - d + j, 0) - f * bj
    R = LaurentPoly({e: c for e, c in coeffs.items() if 0 <= e < d})
    Q = LaurentPoly({e - b._lo: c for e, c in quo.items()})
    return Q, R


def lp_exact_divide(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """``a / b`` for a divisor with unit ends; raises NotDivisible otherwise."""
    if b.is_unit_monomial():
        return a.shift(-b._lo) * b._c[0]
    Q, R = lp_divide(a, b)
    if not R.is_zero():
        raise NotDivisible("nonzero remainder in Laurent polynomial division")
    return Q


@lru_cache(maxsize=None)
def _cyclotomic_cached(r: int) -> LaurentPoly:
    num = LaurentPoly({r: 1, 0: -1})
    for d in range(1, r):
        if r % d == 0:
            Q, R = lp_divide(num, _cyclotomic_cached(d))
            assert R.is_zero()
            num = Q
    return num


def cyclotomic(r: int) -> LaurentPoly:
    """The r-th cyclotomic polynomial, by dividing X^r - 1 by the lower ones."""
    if not isinstance(r, int) or r < 1:
        raise ValueError(f"cyclotomic index must be a positive integer, got {r!r}")
    return _cyclotomic_cached(r)


# ---------------------------------------------------------------------------
# QSeriesTrunc
# ---------------------------------------------------------------------------


def _zero_block(rows: int, width: int, dtype=np.int64) -> np.ndarray:
    if dtype == object:
        blk = np.empty((rows, width), dtype=object)
        blk[:] = 0
        return blk
    return np.zeros((rows, width), dtype=np.int64)


def _compact(block: np.ndarray) -> np.ndarray:
    """Prefer int64 storage when every entry fits."""
    if block.dtype == object:
        b64 = kernels.to_i64(block)
        if b64 is not None:
            return b64
    return block


def _block_gcd(block: np.ndarray) -> int:
    if block.size == 0:
        return 0
    if block.dtype == np.int64:
        return int(np.gcd.reduce(np.abs(block).ravel()))
    return gcd(*block.ravel().tolist())


class QSeriesTrunc:
    r"""``q**offset * sum_{n=0}^{order} c_n(zeta) q**n`` known through q^(offset+order).

    Construct from a list of :class:`LaurentPoly` (``coeffs``) or any values
    convertible to LaurentPoly; ``order`` defaults to ``len(coeffs) - 1``.
    Leading zero coefficients are absorbed into the offset, so ``coeffs[0]``
    is nonzero unless the series vanishes identically to its precision.
    """

    __slots__ = ("offset", "order", "_blk", "_zlo", "_den", "_rows_cache")

    def __init__(self, offset, coeffs: Iterable = (), order: int | None = None):
        rows = [c if isinstance(c, LaurentPoly) else
                (LaurentPoly(c) if isinstance(c, Mapping) else LaurentPoly.constant(c))
                for c in coeffs]
        if order is None:
            order = len(rows) - 1
        rows = rows[:order + 1]
        rows += [LaurentPoly()] * (order + 1 - len(rows))
        nz = [r for r in rows if not r.is_zero()]
        den = 1
        for r in nz:
            den = _lcm(den, r.content_den())
        if nz:
            zlo = min(r.low for r in nz)
            zhi = max(r.high for r in nz)
        else:
            zlo, zhi = 0, -1
        width = zhi - zlo + 1
        vals = []
        for r in rows:
            row = [0] * width
            if not r.is_zero():
                for i, c in enumerate(r._c):
                    row[r._lo - zlo + i] = int(c * den) if den != 1 else c
            vals.append(row)
        blk = np.array(vals, dtype=object).reshape(order + 1, width) if order >= 0 \
            else _zero_block(0, 0)
        self._init(Fraction(offset), order, _compact(blk), zlo, den)

    # internal constructor ---------------------------------------------------
    @classmethod
    def _from_block(cls, offset, order: int, block: np.ndarray, zlo: int, den: int = 1,
                    normalize: bool = True) -> "QSeriesTrunc":
        obj = cls.__new__(cls)
        if block.shape[0] < order + 1:
            pad = _zero_block(order + 1 - block.shape[0], block.shape[1], block.dtype)
            block = np.concatenate([block, pad])
        block = block[:max(order + 1, 0)]
        obj._init(Fraction(offset), order, _compact(block), zlo, den, normalize)
        return obj

    def _init(self, offset, order, blk, zlo, den, normalize=True):
        self._rows_cache = None
        if normalize and blk.size:
            # trim empty zeta columns
            nzc = np.nonzero(np.any(blk != 0, axis=0))[0]
            if nzc.size == 0:
                blk = blk[:, :0]
                zlo = 0
            else:
                a, b = int(nzc[0]), int(nzc[-1]) + 1
                if a or b != blk.shape[1]:
                    blk = blk[:, a:b]
                    zlo += a
                # absorb leading zero rows into the offset
                nzr = np.nonzero(np.any(blk != 0, axis=1))[0]
                k = int(nzr[0])
                if k:
                    blk = blk[k:]
                    offset += k
                    order -= k
            if den != 1 and blk.size:
                g = gcd(_block_gcd(blk), den)
                if g > 1:
                    blk = blk // g
                    den //= g
        if blk.size == 0:
            den = 1
        self.offset = offset
        self.order = order
        self._blk = blk
        self._zlo = zlo
        self._den = den

    # -- queries -----------------------------------------------------------
    @property
    def prec(self):
        """Absolute q-exponent of the last known coefficient."""
        return self.offset + self.order

    @property
    def trunc_order(self) -> int:
        return self.order

    @property
    def is_integral(self) -> bool:
        return self._den == 1

    @property
    def den(self) -> int:
        return self._den

    @property
    def zeta_range(self) -> tuple[int, int]:
        return self._zlo, self._zlo + self._blk.shape[1] - 1

    def block(self) -> tuple[np.ndarray, int, int]:
        """(integer block, lowest zeta exponent, denominator)."""
        return self._blk, self._zlo, self._den

    def is_zero(self) -> bool:
        return self._blk.size == 0 or not np.any(self._blk != 0)

    @property
    def coeffs(self) -> list[LaurentPoly]:
        if self._rows_cache is None:
            rows = []
            for n in range(self.order + 1):
                rows.append(self._row(n))
            self._rows_cache = rows
        return self._rows_cache

    def _row(self, n: int) -> LaurentPoly:
        if n < 0 or n > self.order or n >= self._blk.shape[0] or self._blk.shape[1] == 0:
            return LaurentPoly()
        vals = self._blk[n].tolist()
        if self._den != 1:
            vals = [Fraction(v, self._den) for v in vals]
        return LaurentPoly._make(self._zlo, vals)

    def __getitem__(self, n: int) -> LaurentPoly:
        """Coefficient of q^(offset+n) (relative index)."""
        if n > self.order:
            raise IndexError(f"coefficient q^{self.offset + n} beyond truncation "
                             f"q^{self.prec}")
        if self._rows_cache is not None and 0 <= n:
            return self._rows_cache[n]
        return self._row(n)

    def at(self, e) -> LaurentPoly:
        """Coefficient of q^e (absolute exponent)."""
        n = Fraction(e) - self.offset
        if n.denominator != 1:
            return LaurentPoly()
        n = int(n)
        if n < 0:
            return LaurentPoly()
        return self[n]

    def coeff(self, e, r: int):
        """Coefficient of q^e zeta^r (absolute exponents)."""
        n = Fraction(e) - self.offset
        if n.denominator != 1 or n < 0:
            return 0
        n = int(n)
        if n > self.order:
            raise IndexError(f"q^{e} beyond truncation q^{self.prec}")
        j = r - self._zlo
        if n >= self._blk.shape[0] or j < 0 or j >= self._blk.shape[1]:
            return 0
        v = self._blk[n, j]
        v = int(v)
        return v if self._den == 1 else _norm(Fraction(v, self._den))

    def __repr__(self):
        head = []
        for n in range(min(self.order + 1, 4)):
            c = self[n]
            if not c.is_zero():
                head.append(f"({c})*q^{self.offset + n}")
        body = " + ".join(head) if head else "0"
        return f"{body} + O(q^{self.prec + 1})"

    # -- construction helpers -------------------------------------------------
    @classmethod
    def one(cls, order: int) -> "QSeriesTrunc":
        return cls(0, [LaurentPoly.constant(1)], order)

    @classmethod
    def zero(cls, offset, order: int) -> "QSeriesTrunc":
        return cls(offset, [], order)

    @classmethod
    def from_dict(cls, offset, coeffs: Mapping, order: int) -> "QSeriesTrunc":
        """``coeffs`` maps (n, r) (n relative to offset) to a coefficient."""
        rows: dict = {}
        for (n, r), c in coeffs.items():
            rows.setdefault(n, {})[r] = c
        return cls(offset, [LaurentPoly(rows.get(n, {})) for n in range(order + 1)], order)

    def items(self):
        """Yield (absolute q-exponent, zeta exponent, coefficient) for nonzero terms."""
        blk = self._blk
        if blk.size == 0:
            return
        rows, cols = np.nonzero(blk != 0)
        for n, j in zip(rows.tolist(), cols.tolist()):
            v = int(blk[n, j])
            c = v if self._den == 1 else _norm(Fraction(v, self._den))
            yield self.offset + n, self._zlo + j, c

    # -- arithmetic --------------------------------------------------------
    def truncate(self, order: int) -> "QSeriesTrunc":
        """Keep coefficients through relative index ``order``."""
        order = min(order, self.order)
        return QSeriesTrunc._from_block(self.offset, order, self._blk[:order + 1],
                                        self._zlo, self._den)

    def truncate_abs(self, e) -> "QSeriesTrunc":
        """Keep coefficients through absolute exponent ``e``."""
        n = Fraction(e) - self.offset
        return self.truncate(int(n.__floor__()))

    def _aligned(self, other: "QSeriesTrunc"):
        d = other.offset - self.offset
        if d.denominator != 1:
            raise ValueError("offsets differ by a non-integer; cannot align")
        return int(d)

    def _binary_add(self, other: "QSeriesTrunc", sign: int) -> "QSeriesTrunc":
        shift = self._aligned(other)
        base_off = min(self.offset, other.offset)
        prec = min(self.prec, other.prec)
        order = int(prec - base_off)
        if order < 0:
            return QSeriesTrunc.zero(base_off, order)
        zlo = min(self._zlo, other._zlo) if (self._blk.shape[1] and other._blk.shape[1]) \
            else (self._zlo if self._blk.shape[1] else other._zlo)
        zhi = max(self.zeta_range[1] if self._blk.shape[1] else zlo - 1,
                  other.zeta_range[1] if other._blk.shape[1] else zlo - 1)
        width = max(zhi - zlo + 1, 0)
        den = _lcm(self._den, other._den)
        dtype = np.int64 if (self._blk.dtype == np.int64 and other._blk.dtype == np.int64
                             and den == 1) else object
        out = _zero_block(order + 1, width, dtype)
        for ser, sgn in ((self, 1), (other, sign)):
            r0 = int(ser.offset - base_off)
            if r0 > order:
                continue
            blk = ser._blk
            nr = min(blk.shape[0], order + 1 - r0)
            if nr <= 0 or blk.shape[1] == 0:
                continue
            c0 = ser._zlo - zlo
            part = blk[:nr]
            mult = den // ser._den
            if mult != 1:
                part = part.astype(object) * mult
            if dtype == np.int64:
                lim = np.int64(1) << 61
                if (np.abs(out).max(initial=0) >= lim) or (np.abs(part).max(initial=0) >= lim):
                    out = out.astype(object)
                    dtype = object
            if sgn == 1:
                out[r0:r0 + nr, c0:c0 + blk.shape[1]] += part
            else:
                out[r0:r0 + nr, c0:c0 + blk.shape[1]] -= part
        return QSeriesTrunc._from_block(base_off, order, out, zlo, den)

    def __add__(self, other):
        if not isinstance(other, QSeriesTrunc):
            return NotImplemented
        return self._binary_add(other, 1)

    def __sub__(self, other):
        if not isinstance(other, QSeriesTrunc):
            return NotImplemented
        return self._binary_add(other, -1)

    def __neg__(self):
        return QSeriesTrunc._from_block(self.offset, self.order, -self._obj_safe(),
                                        self._zlo, self._den)

    def _obj_safe(self):
        blk = self._blk
        if blk.dtype == np.int64 and blk.size and np.abs(blk).max() >= (1 << 62):
            return blk.astype(object)
        return blk

    def scale(self, s) -> "QSeriesTrunc":
        s = _norm(s)
        if isinstance(s, Fraction):
            num, den = s.numerator, s.denominator
        else:
            num, den = s, 1
        blk = self._blk.astype(object) * num if num not in (1, -1) else \
            (self._blk if num == 1 else -self._obj_safe())
        return QSeriesTrunc._from_block(self.offset, self.order, blk, self._zlo,
                                        self._den * den)

    def shift_zeta(self, j: int) -> "QSeriesTrunc":
        return QSeriesTrunc._from_block(self.offset, self.order, self._blk,
                                        self._zlo + j, self._den, normalize=False)

    def shift_q(self, e) -> "QSeriesTrunc":
        """Multiply by q**e."""
        return QSeriesTrunc._from_block(self.offset + e, self.order, self._blk,
                                        self._zlo, self._den, normalize=False)

    def map_zeta(self, k: int) -> "QSeriesTrunc":
        """Substitute zeta -> zeta**k (k >= 1)."""
        if k == 1:
            return self
        if k < 1:
            raise ValueError("zeta substitution exponent must be positive")
        r, w = self._blk.shape
        if w == 0:
            return self
        out = _zero_block(r, (w - 1) * k + 1, self._blk.dtype)
        out[:, ::k] = self._blk
        return QSeriesTrunc._from_block(self.offset, self.order, out, self._zlo * k,
                                        self._den)

    def reflect_zeta(self) -> "QSeriesTrunc":
        lo, hi = self.zeta_range
        return QSeriesTrunc._from_block(self.offset, self.order, self._blk[:, ::-1].copy(),
                                        -hi, self._den)

    def q_dilate(self, k: int) -> "QSeriesTrunc":
        """Substitute q -> q**k; the result is known through q^(k*prec)."""
        r, w = self._blk.shape
        order = self.order * k
        out = _zero_block(order + 1, w, self._blk.dtype)
        out[::k][:r] = self._blk
        return QSeriesTrunc._from_block(self.offset * k, order, out, self._zlo, self._den)

    def __mul__(self, other):
        if isinstance(other, QSeriesTrunc):
            return series_mul(self, other)
        if isinstance(other, LaurentPoly):
            return series_mul(self, QSeriesTrunc(0, [other], self.order))
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, QSeriesTrunc):
            return series_divide(self, other)
        return self.scale(Fraction(1) / _norm(other))

    def __pow__(self, e: int):
        return series_mul_pow(self, e)

    def equal_through(self, other: "QSeriesTrunc", prec=None) -> bool:
        """Coefficient-wise equality through ``prec`` (default: common precision)."""
        if prec is None:
            prec = min(self.prec, other.prec)
        d = self.truncate_abs(prec) - other.truncate_abs(prec)
        return d.is_zero()

    def __eq__(self, other):
        if not isinstance(other, QSeriesTrunc):
            return NotImplemented
        return self.prec == other.prec and self.equal_through(other)

    def __hash__(self):
        return hash((self.offset, self.order, self._blk.shape))


# ---------------------------------------------------------------------------
# bulk kernels on blocks
# ---------------------------------------------------------------------------


def _mul_blocks(A: np.ndarray, B: np.ndarray, rows: int) -> np.ndarray:
    """Truncated product of two integer blocks (exact)."""
    if A.shape[1] == 0 or B.shape[1] == 0 or rows <= 0:
        return np.zeros((max(rows, 0), max(A.shape[1] + B.shape[1] - 1, 0)), dtype=np.int64)
    nza = int(np.count_nonzero(A[:rows]))
    nzb = int(np.count_nonzero(B[:rows]))
    if kernels.BACKEND == "cython" and nza * nzb <= 4_000_000 \
            and A.dtype == np.int64 and B.dtype == np.int64:
        return kernels.conv2d(A[:rows], B[:rows], rows)
    if nza == 1 or nzb == 1:
        # a single term: plain shift
        src, one = (B, A) if nza == 1 else (A, B)
        n0, j0 = [int(x[0]) for x in np.nonzero(one[:rows] != 0)]
        c = one[n0, j0]
        W = A.shape[1] + B.shape[1] - 1
        out = _zero_block(rows, W, object if (src.dtype == object or one.dtype == object)
                          else np.int64)
        return kernels.shift_accumulate(src[:rows], out, [(n0, j0, c)])
    return _kron.mul_2d(A, B, rows)


def series_mul(a: QSeriesTrunc, b: QSeriesTrunc) -> QSeriesTrunc:
    """Product truncated at the common relative order."""
    order = min(a.order, b.order)
    offset = a.offset + b.offset
    if order < 0:
        return QSeriesTrunc.zero(offset, order)
    blk = _mul_blocks(a._blk, b._blk, order + 1)
    return QSeriesTrunc._from_block(offset, order, blk, a._zlo + b._zlo, a._den * b._den)


def series_mul_pow(f: QSeriesTrunc, e: int) -> QSeriesTrunc:
    """``f**e`` truncated at the order of ``f``.

    Negative exponents require the leading coefficient to be a unit monomial
    (or, for rational series, a nonzero monomial).
    """
    if e == 0:
        return QSeriesTrunc.one(f.order)
    if e < 0:
        lead = f[0]
        if f.is_zero() or lead.width != 1 or (f.is_integral and not lead.is_unit_monomial()):
            raise ZeroDivisionError("cannot invert a series whose leading coefficient is "
                                    "not a unit monomial")
        f = series_divide(QSeriesTrunc.one(f.order), f)
        e = -e
    result = None
    base = f
    while e:
        if e & 1:
            result = base if result is None else series_mul(result, base)
        e >>= 1
        if e:
            base = series_mul(base, base)
    return result


def _div_by_zeta_free(a: QSeriesTrunc, b: QSeriesTrunc, order: int) -> np.ndarray | None:
    """Quotient block when ``b`` has a single zeta column and unit leading term."""
    bcol = b._blk[:, 0].tolist()
    lead = bcol[0]
    if lead not in (1, -1):
        return None
    A = a._blk[:order + 1]
    if A.shape[0] < order + 1:
        A = np.concatenate([A, _zero_block(order + 1 - A.shape[0], A.shape[1], A.dtype)])
    C = A.astype(object).copy()
    nb = len(bcol)
    for n in range(order + 1):
        row = C[n]
        for j in range(1, min(n, nb - 1) + 1):
            bj = bcol[j]
            if bj:
                row -= bj * C[n - j]
        if lead == -1:
            C[n] = -row
    return C


def series_divide(a: QSeriesTrunc, b: QSeriesTrunc, zeta_hint: tuple | None = None) -> QSeriesTrunc:
    r"""Return ``c`` with ``a = b*c`` to the common truncation.

    The leading coefficient ``b_0`` of ``b`` must be a unit in the Laurent
    polynomial ring, or every step of the recurrence
    ``a_n = b_n c_0 + ... + b_0 c_n`` must divide exactly by ``b_0``.
    A nonzero remainder raises :class:`NotDivisible` carrying the absolute
    q-index where it occurred.  ``zeta_hint`` optionally bounds the zeta
    exponents of the quotient, which speeds up large divisions.
    """
    if b.is_zero():
        raise ZeroDivisionError("division by a zero series")
    order = min(a.order, b.order)
    offset = a.offset - b.offset
    if order < 0:
        return QSeriesTrunc.zero(offset, order)
    if a.is_zero():
        return QSeriesTrunc.zero(offset, order)
    b0 = b[0]
    if b._blk.shape[1] == 1 and b.is_integral:
        C = _div_by_zeta_free(a, b, order)
        if C is not None:
            return QSeriesTrunc._from_block(offset, order, C, a._zlo - b._zlo,
                                            a._den * 1).scale(Fraction(b._den))
    if b0.is_integral and b0._c[0] in (1, -1) and b.is_integral:
        fast = _divide_2adic(a, b, order, zeta_hint)
        if fast is not None:
            return fast
    return _divide_recurrence(a, b, order)


def _divide_recurrence(a: QSeriesTrunc, b: QSeriesTrunc, order: int) -> QSeriesTrunc:
    b0 = b[0]
    monomial = b0.width == 1
    brows = [b[j] for j in range(order + 1)]
    crow: list[LaurentPoly] = []
    for n in range(order + 1):
        t = a[n] if n <= a.order else LaurentPoly()
        for j in range(1, n + 1):
            bj = brows[j]
            if not bj.is_zero() and not crow[n - j].is_zero():
                t = t - bj * crow[n - j]
        if t.is_zero():
            crow.append(LaurentPoly())
            continue
        if monomial:
            c = t.shift(-b0._lo) * (Fraction(1) / b0._c[0])
        else:
            try:
                c = lp_exact_divide(t, b0)
            except NotDivisible:
                raise NotDivisible(
                    f"remainder at q^{a.offset + n} dividing by the leading coefficient",
                    q_index=a.offset + n) from None
            except ValueError:
                raise
        crow.append(c)
    return QSeriesTrunc(a.offset - b.offset, crow, order)


def _divide_2adic(a: QSeriesTrunc, b: QSeriesTrunc, order: int, zeta_hint) -> QSeriesTrunc | None:
    """Kronecker/2-adic quotient with verification; None if it cannot be certified."""
    rows = order + 1
    A = a._blk[:rows]
    B = b._blk[:rows]
    if A.shape[1] == 0:
        return None
    b0 = b[0]
    e0, h0 = b0.low, b0.high
    zlo_b = b._zlo
    wb = B.shape[1]
    alo, ahi = a.zeta_range
    if zeta_hint is not None:
        c_lo0, c_hi0 = zeta_hint
    else:
        c_lo0, c_hi0 = alo - e0, ahi - h0
    base_bits = max(_kron.max_bits(A), _kron.max_bits(B)) + 64
    attempts = [(0, base_bits), (0, 2 * base_bits), (0, 4 * base_bits),
                (wb, 4 * base_bits), (0, 8 * base_bits), (wb, 16 * base_bits)]
    for margin, bits in attempts:
        c_lo, c_hi = c_lo0 - margin, c_hi0 + margin
        if c_hi < c_lo:
            return None
        wc = c_hi - c_lo + 1
        # a's zeta origin must be zlo_b + c_lo
        a_origin = zlo_b + c_lo
        if alo < a_origin:
            continue
        W = max(wb + wc - 1, ahi - a_origin + 1)
        Aw = _zero_block(rows, W, A.dtype)
        Aw[:A.shape[0], alo - a_origin: alo - a_origin + A.shape[1]] = A
        fa = _kron.flatten(Aw, W)
        fb = _kron.flatten(B, W)
        p0 = e0 - zlo_b
        K = rows * W
        flat_c = _kron.div_flat(fa, fb, K, p0, bits)
        Cw = flat_c.reshape(rows, W)
        if np.any(Cw[:, wc:] != 0):
            continue
        C = Cw[:, :wc]
        back = _mul_blocks(B, C, rows)
        # compare with A placed at origin zlo_b + c_lo
        if back.shape[1] < Aw.shape[1]:
            back = np.concatenate([back, _zero_block(rows, Aw.shape[1] - back.shape[1],
                                                     back.dtype)], axis=1)
        if np.array_equal(back[:, :Aw.shape[1]].astype(object), Aw.astype(object)) and \
                not np.any(back[:, Aw.shape[1]:] != 0):
            out = QSeriesTrunc._from_block(a.offset - b.offset, order, C, c_lo, 1)
            return out.scale(Fraction(b._den, a._den)) if (a._den != 1 or b._den != 1) else out
    return None


# ---------------------------------------------------------------------------
# one-variable power series helpers
# ---------------------------------------------------------------------------


def power_series_pow(f: list, e: int, L: int) -> list:
    """``f**e`` through x^L for an integer series with ``f[0] == 1``.

    Uses the recurrence n*g_n = sum_{k=1}^{n} ((e+1)k - n) f_k g_{n-k},
    valid for every integer ``e``.
    """
    if not f or f[0] != 1:
        raise ValueError("power_series_pow needs constant term 1")
    g = [0] * (L + 1)
    g[0] = 1
    fl = [f[k] if k < len(f) else 0 for k in range(L + 1)]
    nz = [k for k in range(1, L + 1) if fl[k]]
    for n in range(1, L + 1):
        s = 0
        for k in nz:
            if k > n:
                break
            s += ((e + 1) * k - n) * fl[k] * g[n - k]
        q, r = divmod(s, n)
        if r:
            # non-integral series (possible only for rational input)
            g[n] = Fraction(s, n)
        else:
            g[n] = q
    return g
