r"""Theta blocks: multiplicity calculus, invariants, expansion, valuation, search.

A theta block is ``eta^phi(0) * prod_{r>=1} (theta_r / eta)^phi(r)`` where
``theta_r(tau, z) = theta(tau, r z)`` is the odd Jacobi theta function.  The
finitely supported map ``phi`` (the *phi-form*) determines everything; the
*nu-form* ``nu(r) = sum_{t>=1} phi(t r)`` (with ``nu(0) = phi(0)``) counts
atoms, and a block is holomorphic exactly when ``nu >= 0``.

Text format: whitespace separated ``base^exp`` tokens, ``0^e`` meaning
``eta^e`` and ``r^e`` meaning ``(theta_r/eta)^e``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt
from typing import Iterator, Mapping

import numpy as np

from . import kernels
from .arith import dedekind_psi, divisors, jordan2, mobius, totient
from .modforms import eta_power
from .series import (LaurentPoly, QSeriesTrunc, cyclotomic, lp_divide,
                     lp_exact_divide, series_divide)

__all__ = [
    "MultiplicityFunction", "ThetaBlock", "OrdResult",
    "phi_to_nu", "nu_to_phi", "nu_phi_convert", "tb_invariants",
    "tb_expand", "tb_expand_product", "tb_ord", "tb_enumerate",
    "tb_wh_quotient_test", "ct_bounds", "parse_theta_block",
    "format_theta_block", "atom",
]


# ---------------------------------------------------------------------------
# phi / nu calculus
# ---------------------------------------------------------------------------


def _clean(d: Mapping) -> dict:
    out = {}
    for r, v in d.items():
        r, v = int(r), int(v)
        if r < 0:
            raise ValueError(f"multiplicities live on r >= 0, got r={r}")
        if v:
            out[r] = out.get(r, 0) + v
    return {r: v for r, v in sorted(out.items()) if v}


def phi_to_nu(phi: Mapping) -> dict:
    """nu(r) = sum_{t>=1} phi(t r) for r >= 1; nu(0) = phi(0)."""
    phi = _clean(phi)
    nu: dict = {}
    if 0 in phi:
        nu[0] = phi[0]
    for s, v in phi.items():
        if s == 0:
            continue
        for r in divisors(s):
            nu[r] = nu.get(r, 0) + v
    return {r: v for r, v in sorted(nu.items()) if v}


def nu_to_phi(nu: Mapping) -> dict:
    """Moebius inversion: phi(r) = sum_{t>=1} mu(t) nu(t r)."""
    nu = _clean(nu)
    phi: dict = {}
    if 0 in nu:
        phi[0] = nu[0]
    for s, v in nu.items():
        if s == 0:
            continue
        for r in divisors(s):
            mu = mobius(s // r)
            if mu:
                phi[r] = phi.get(r, 0) + mu * v
    return {r: v for r, v in sorted(phi.items()) if v}


def nu_phi_convert(data: Mapping, direction: str) -> dict:
    """Convert between forms; ``direction`` is ``"phi->nu"`` or ``"nu->phi"``."""
    if direction == "phi->nu":
        return phi_to_nu(data)
    if direction == "nu->phi":
        return nu_to_phi(data)
    raise ValueError(f"unknown direction {direction!r}")


class MultiplicityFunction:
    """Finitely supported integer function on r >= 0, stored in phi-form."""

    __slots__ = ("_phi", "_nu", "_key")

    def __init__(self, phi: Mapping | None = None):
        self._phi = _clean(phi or {})
        self._nu = None
        self._key = tuple(self._phi.items())

    @classmethod
    def from_nu(cls, nu: Mapping) -> "MultiplicityFunction":
        obj = cls(nu_to_phi(nu))
        return obj

    @property
    def phi(self) -> dict:
        return dict(self._phi)

    @property
    def nu(self) -> dict:
        if self._nu is None:
            self._nu = phi_to_nu(self._phi)
        return dict(self._nu)

    def phi_at(self, r: int) -> int:
        return self._phi.get(r, 0)

    def nu_at(self, r: int) -> int:
        if self._nu is None:
            self._nu = phi_to_nu(self._phi)
        return self._nu.get(r, 0)

    def support(self) -> list[int]:
        return [r for r in self._phi if r > 0]

    def __eq__(self, other):
        return isinstance(other, MultiplicityFunction) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __mul__(self, other: "MultiplicityFunction") -> "MultiplicityFunction":
        d = dict(self._phi)
        for r, v in other._phi.items():
            d[r] = d.get(r, 0) + v
        return MultiplicityFunction(d)

    def __truediv__(self, other: "MultiplicityFunction") -> "MultiplicityFunction":
        d = dict(self._phi)
        for r, v in other._phi.items():
            d[r] = d.get(r, 0) - v
        return MultiplicityFunction(d)

    def __repr__(self):
        return f"MultiplicityFunction({format_theta_block(self)!r})"


def atom(r: int) -> MultiplicityFunction:
    """The r-th atom prod_{s | r} theta_s^mu(r/s) (for r >= 2; r = 1 gives theta/eta)."""
    return MultiplicityFunction.from_nu({r: 1})


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"^(\d+)\^(-?\d+)$")


def parse_theta_block(text: str, weight: int | None = None) -> MultiplicityFunction:
    """Parse ``"0^4 1^2 2^1"``; repeated bases are summed.

    When the text has no ``0^e`` token and ``weight`` is given, the eta
    exponent defaults to ``2*weight`` (the convention of tabulated blocks).
    """
    phi: dict = {}
    tokens = text.split()
    if not tokens:
        raise ValueError("empty theta block text")
    for tok in tokens:
        mt = _TOKEN.match(tok)
        if not mt:
            raise ValueError(f"malformed theta block token {tok!r}")
        r, e = int(mt.group(1)), int(mt.group(2))
        phi[r] = phi.get(r, 0) + e
    if 0 not in phi and weight is not None:
        phi[0] = 2 * weight
    return MultiplicityFunction(phi)


def format_theta_block(mult, with_eta: bool = True) -> str:
    """Inverse of :func:`parse_theta_block`."""
    if isinstance(mult, ThetaBlock):
        mult = mult.mult
    toks = [f"{r}^{e}" for r, e in mult._phi.items() if with_eta or r > 0]
    return " ".join(toks)


# ---------------------------------------------------------------------------
# ThetaBlock
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaBlock:
    """A theta block with its derived invariants (see :func:`tb_invariants`)."""

    mult: MultiplicityFunction
    k: Fraction = field(init=False)
    m: Fraction = field(init=False)
    A: Fraction = field(init=False)
    B: Fraction = field(init=False)
    C: Fraction = field(init=False)

    def __post_init__(self):
        phi = self.mult._phi
        p0 = phi.get(0, 0)
        s1 = sum(v for r, v in phi.items() if r > 0)
        object.__setattr__(self, "k", Fraction(p0, 2))
        m = Fraction(sum(r * r * v for r, v in phi.items()), 2)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "A", Fraction(p0, 24) + Fraction(s1, 12))
        object.__setattr__(self, "B", Fraction(sum(r * v for r, v in phi.items()), 2))
        object.__setattr__(self, "C", m)

    @property
    def phi(self) -> dict:
        return self.mult.phi

    @property
    def nu(self) -> dict:
        return self.mult.nu

    @property
    def is_basic(self) -> bool:
        return self.k.denominator == 1 and self.m.denominator == 1 and self.m >= 0

    @property
    def is_holomorphic(self) -> bool:
        return all(v >= 0 for r, v in self.mult.nu.items() if r >= 1)

    @property
    def has_denominator(self) -> bool:
        return any(v < 0 for r, v in self.mult._phi.items() if r >= 1)

    @property
    def weight(self) -> int:
        return int(self.k)

    @property
    def index(self) -> int:
        return int(self.m)

    @cached_property
    def germ(self) -> LaurentPoly:
        """G(zeta) = sum_{r in Z} phi(|r|) zeta^r."""
        t = {}
        for r, v in self.mult._phi.items():
            t[r] = v
            if r:
                t[-r] = v
        return LaurentPoly(t)

    @cached_property
    def baby(self) -> LaurentPoly | None:
        """b(zeta) = zeta^-B prod (zeta^r - 1)^phi(r), computed via cyclotomic factors.

        None when the block is not holomorphic (b is then not a Laurent polynomial).
        """
        if self.B.denominator != 1 or not self.is_holomorphic:
            return None
        out = LaurentPoly.constant(1)
        for r, v in self.mult.nu.items():
            if r >= 1 and v:
                out = out * cyclotomic(r) ** v
        return out.shift(-int(self.B))

    def baby_direct(self) -> LaurentPoly | None:
        """b(zeta) from the defining product, dividing out negative factors."""
        if self.B.denominator != 1:
            return None
        num = LaurentPoly.constant(1)
        den = LaurentPoly.constant(1)
        for r, v in self.mult._phi.items():
            if r == 0:
                continue
            f = LaurentPoly({r: 1, 0: -1})
            if v > 0:
                num = num * f ** v
            else:
                den = den * f ** (-v)
        Q, R = lp_divide(num, den)
        if not R.is_zero():
            return None
        return Q.shift(-int(self.B))

    def __str__(self):
        return format_theta_block(self.mult)

    def __hash__(self):
        return hash(self.mult)

    def __eq__(self, other):
        return isinstance(other, ThetaBlock) and self.mult == other.mult


def tb_invariants(mult) -> ThetaBlock:
    """Build a :class:`ThetaBlock` (accepts a MultiplicityFunction, dict or text)."""
    if isinstance(mult, ThetaBlock):
        return mult
    if isinstance(mult, str):
        mult = parse_theta_block(mult)
    elif not isinstance(mult, MultiplicityFunction):
        mult = MultiplicityFunction(mult)
    return ThetaBlock(mult)


# ---------------------------------------------------------------------------
# expansion
# ---------------------------------------------------------------------------


def _theta_terms(r: int, L: int) -> list:
    """zeta^(r/2) q^(-1/8) theta(tau, r z) = sum_n (-1)^n q^(n(n+1)/2) zeta^(r(n+1))."""
    terms = []
    n = 0
    while n * (n + 1) // 2 <= L:
        e = n * (n + 1) // 2
        sgn = -1 if n % 2 else 1
        terms.append((e, r * (n + 1), sgn))
        terms.append((e, -r * n, -sgn))
        n += 1
    return terms


def _multiply_thetas(blk: np.ndarray, zlo: int, factors: list, L: int):
    """Multiply a block (rows 0..L) by the normalized theta series of ``factors``."""
    for r in factors:
        terms = _theta_terms(r, L)
        lo = min(t[1] for t in terms)
        hi = max(t[1] for t in terms)
        width = blk.shape[1] + hi - lo
        dst = np.zeros((L + 1, width), dtype=np.int64)
        blk = kernels.shift_accumulate(blk, dst, [(dq, dz - lo, c) for dq, dz, c in terms])
        zlo += lo
        nz = np.nonzero(np.any(blk != 0, axis=0))[0]
        if nz.size:
            a, b = int(nz[0]), int(nz[-1]) + 1
            blk = blk[:, a:b]
            zlo += a
    return blk, zlo


def _theta_power_series(factors: list, L: int) -> QSeriesTrunc:
    one = np.zeros((L + 1, 1), dtype=np.int64)
    one[0, 0] = 1
    blk, zlo = _multiply_thetas(one, 0, factors, L)
    return QSeriesTrunc._from_block(0, L, blk, zlo, 1)


def tb_expand(tb, q_order: int) -> QSeriesTrunc:
    r"""Expand a holomorphic theta block through relative order ``q_order``.

    Returns ``q^A b(zeta) (1 - G(zeta) q + ...)`` as a :class:`QSeriesTrunc`
    with offset ``A``.  The expansion multiplies sparse theta series into a
    dense block, divides by the theta factors with negative multiplicity,
    and finally multiplies by the eta power.
    """
    tb = tb_invariants(tb)
    if tb.B.denominator != 1:
        raise ValueError("theta block with half-integral zeta exponent B is not expandable "
                         "over integer zeta exponents")
    if not tb.is_holomorphic:
        raise ValueError(f"theta block {tb} is not holomorphic (some nu(r) < 0)")
    L = q_order
    num, den = [], []
    for r, v in tb.mult._phi.items():
        if r == 0:
            continue
        (num if v > 0 else den).extend([r] * abs(v))
    num.sort()
    den.sort()
    series = _theta_power_series(num, L)
    if den:
        series = series_divide(series, _theta_power_series(den, L))
    n_theta = sum(v for r, v in tb.mult._phi.items() if r > 0)
    eta_exp = tb.mult.phi_at(0) - n_theta
    if eta_exp:
        series = series * eta_power(eta_exp, L).shift_q(-Fraction(eta_exp, 24))
    # theta_r = q^(1/8) zeta^(-r/2) * normalized series
    return series.shift_q(tb.A).shift_zeta(-int(tb.B))


def tb_expand_product(tb, q_order: int) -> QSeriesTrunc:
    r"""Reference expansion from the double product.

    ``q^A b(zeta) prod_{n>=1} prod_{r in Z} (1 - q^n zeta^r)^phi(|r|)`` via the
    logarithmic-derivative recurrence ``n F_n = sum_j T_j F_{n-j}`` with
    ``T_N = -sum_{d | N} d G(zeta^(N/d))``.  Slow, used as an oracle.
    """
    tb = tb_invariants(tb)
    b = tb.baby
    if b is None:
        raise ValueError(f"theta block {tb} has no Laurent polynomial baby block")
    G = tb.germ
    L = q_order
    T = [LaurentPoly()]
    for N in range(1, L + 1):
        acc = LaurentPoly()
        for d in divisors(N):
            acc = acc + G.subs_power(N // d) * d
        T.append(-acc)
    F = [LaurentPoly.constant(1)]
    for n in range(1, L + 1):
        s = LaurentPoly()
        for j in range(1, n + 1):
            s = s + T[j] * F[n - j]
        F.append(LaurentPoly({e: Fraction(c, n) for e, c in s.terms.items()}))
    return QSeriesTrunc(tb.A, [b * f for f in F], L)


# ---------------------------------------------------------------------------
# valuation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrdResult:
    """Piecewise quadratic valuation on [0, 1] and its minimum.

    ``pieces`` holds ``(x_lo, x_hi, c0, c1, c2)`` meaning
    ``ord(x) = c0 + c1 x + c2 x^2`` on ``[x_lo, x_hi]``.
    """

    pieces: tuple
    Ord: Fraction
    argmin: Fraction

    @property
    def is_cusp(self) -> bool:
        return self.Ord > 0

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        x -= x.numerator // x.denominator
        for lo, hi, c0, c1, c2 in self.pieces:
            if lo <= x <= hi:
                return c0 + c1 * x + c2 * x * x
        raise ValueError(x)


def _ord_sweep(phi: Mapping, early_exit: bool):
    """Sweep the breakpoints j/r of [0, 1] keeping 24*ord as integer quadratics.

    On a piece where {r x} = r x - j_r, 24*ord(x) = c0 + c1 x + c2 x^2 with
    c2 = 12 sum phi(r) r^2 constant and c0, c1 changing by one term when a
    breakpoint of r is crossed.  Returns (pieces, min value, argmin); with
    ``early_exit`` the sweep stops at the first nonpositive value.
    """
    rs = [(r, v) for r, v in phi.items() if r > 0]
    c2 = 12 * sum(v * r * r for r, v in rs)
    c1 = -12 * sum(v * r for r, v in rs)
    c0 = phi.get(0, 0) + 2 * sum(v for _, v in rs)
    events: dict = {}
    for r, v in rs:
        for j in range(1, r):
            g = gcd(j, r)
            events.setdefault((j // g, r // g), []).append((r, v))
    keys = sorted(events, key=lambda t: t[0] / t[1])
    keys.append((1, 1))
    pieces = []
    best_num, best_den, arg = None, 1, (0, 1)

    def consider(num, den, x):
        nonlocal best_num, best_den, arg
        if best_num is None or num * best_den < best_num * den or (
                num * best_den == best_num * den and x[0] * arg[1] < arg[0] * x[1]):
            best_num, best_den, arg = num, den, x

    lo = (0, 1)
    for hi in keys:
        pieces.append((lo, hi, c0, c1, c2))
        for p, q in (lo, hi):
            consider(c0 * q * q + c1 * p * q + c2 * p * p, q * q, (p, q))
        if c2 > 0 and lo[0] * 2 * c2 < -c1 * lo[1] and -c1 * hi[1] < hi[0] * 2 * c2:
            # vertex x = -c1/(2 c2), value c0 - c1^2/(4 c2)
            consider(4 * c0 * c2 - c1 * c1, 4 * c2, (-c1, 2 * c2))
        if early_exit and best_num <= 0:
            return pieces, Fraction(best_num, 24 * best_den), Fraction(*arg)
        # crossing x = j/r for each r with this breakpoint: j_r increases by one
        for r, v in events.get(hi, ()):
            j = hi[0] * r // hi[1]
            # 12 v ((r x - j)^2 - (r x - j)) - 12 v ((r x - j + 1)^2 - (r x - j + 1))
            c1 += -24 * v * r
            c0 += 12 * v * (j * j + j - (j - 1) * (j - 1) - (j - 1))
        lo = hi
    return pieces, Fraction(best_num, 24 * best_den), Fraction(*arg)


def tb_ord(tb) -> OrdResult:
    r"""Exact valuation of a theta block.

    ``ord(x) = phi(0)/24 + sum_{r>=1} phi(r) B2({r x})/2`` with ``B2`` the
    periodic second Bernoulli function; ``Ord`` is its minimum over a period.
    """
    tb = tb_invariants(tb)
    raw, best, arg = _ord_sweep(tb.mult._phi, False)
    pieces = tuple((Fraction(*lo), Fraction(*hi), Fraction(c0, 24), Fraction(c1, 24),
                    Fraction(c2, 24)) for lo, hi, c0, c1, c2 in raw)
    return OrdResult(pieces, best, arg)


def _is_cusp(phi: Mapping) -> bool:
    _, best, _ = _ord_sweep(phi, True)
    return best > 0


def ord_support_scan(series: QSeriesTrunc, m) -> Fraction:
    """min over the stored support of n - r^2/(4m) (truncation oracle for Ord)."""
    m = Fraction(m)
    best = None
    for n, r, _ in series.items():
        v = Fraction(n) - Fraction(r * r) / (4 * m)
        if best is None or v < best:
            best = v
    return best


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def _test_points(qmax: int) -> list[tuple[int, int]]:
    return [(p, q) for q in range(2, qmax + 1) for p in range(1, q // 2 + 1) if gcd(p, q) == 1]


def _scaled_half_b2(s: int, p: int, q: int) -> int:
    """24 q^2 * B2({s p / q}) / 2, an integer."""
    u = (s * p) % q
    return 12 * (u * u - u * q) + 2 * q * q


_POINTS = _test_points(16)


def _theta_vals(y: int) -> np.ndarray:
    # theta_y/eta at every test point
    return np.array([_scaled_half_b2(y, p, q) for p, q in _POINTS], dtype=np.int64)


def _atom_vals(y: int) -> np.ndarray:
    return np.array([sum(mobius(y // d) * _scaled_half_b2(d, p, q) for d in divisors(y))
                     for p, q in _POINTS], dtype=np.int64)


class _Search:
    """Depth-first search for non-increasing item tuples with a fixed total weight.

    Each item y has a weight w(y) (y^2 for thetas, J2(y) for atoms), a
    contribution b(y) to 2B and a valuation vector at the test points.  With
    ``bound_sq`` set, branches are cut when every completion has
    ``(2B)^2 >= bound_sq`` or a nonpositive valuation at some test point;
    both cuts are necessary conditions for a cusp form.
    """

    def __init__(self, items, weight, contrib, vals, bound_sq, count=None):
        self.items = items
        self.w = {y: weight(y) for y in items}
        self.b = {y: contrib(y) for y in items}
        self.count = count
        self.bound_sq = bound_sq
        self.vals = vals
        # prefix extrema over items <= y: min b/w and max val/w
        self.bmin = {}
        self.vmax = {}
        bn = bd = None
        vn = vd = None
        for y in items:
            if bn is None or self.b[y] * bd < bn * self.w[y]:
                bn, bd = self.b[y], self.w[y]
            self.bmin[y] = (bn, bd)
            if vals is not None:
                v = vals[y]
                wd = np.full(v.shape, self.w[y], dtype=np.int64)
                if vn is None:
                    vn, vd = v.copy(), wd
                else:
                    better = v * vd > vn * wd
                    vn = np.where(better, v, vn)
                    vd = np.where(better, wd, vd)
                self.vmax[y] = (vn, vd)
        # Lagrangian bound for a fixed part count: for any lam >= 0,
        # sum v(y_i) <= parts * max_y (v(y) - lam w(y)) + lam * rem.
        # lam runs over q^2 / 2^j (scaled by 2^8 to stay integral).
        self.lam = None
        if vals is not None and count is not None:
            q2 = np.array([q * q for _, q in _POINTS], dtype=np.int64)
            lam = np.stack([q2 * (1 << (8 - j)) for j in range(9)] + [0 * q2], axis=1)
            self.lam = lam
            self.lagr = {}
            top = None
            for y in items:
                cur = (vals[y][:, None] << 8) - lam * self.w[y]
                top = cur if top is None else np.maximum(top, cur)
                self.lagr[y] = top
    def _reachable(self, total):
        """Bitsets of weights reachable from items[0..idx] (with exactly p parts)."""
        mask = (1 << (total + 1)) - 1
        W = [self.w[y] for y in self.items]
        if self.count is None:
            reach = []
            cur = 1
            for w in W:
                prev = None
                while prev != cur:
                    prev = cur
                    cur = (cur | (cur << w)) & mask
                reach.append(cur)
            return reach
        reach = [[0] * len(W) for _ in range(self.count + 1)]
        for i in range(len(W)):
            reach[0][i] = 1
        for p in range(1, self.count + 1):
            for i, w in enumerate(W):
                below = reach[p][i - 1] if i else 0
                reach[p][i] = (below | (reach[p - 1][i] << w)) & mask
        return reach

    def _run_compiled(self, total, start_b, base_vals, reach):
        n = len(self.items)
        i64 = np.int64
        y = np.array(self.items, dtype=i64)
        w = np.array([self.w[v] for v in self.items], dtype=i64)
        b = np.array([self.b[v] for v in self.items], dtype=i64)
        bn = np.array([self.bmin[v][0] for v in self.items], dtype=i64)
        bd = np.array([self.bmin[v][1] for v in self.items], dtype=i64)

        def bits(x):
            raw = np.frombuffer(x.to_bytes(total // 8 + 1, "little"), dtype=np.uint8)
            return np.unpackbits(raw, bitorder="little")[:total + 1]

        if self.count is None:
            rtab = np.concatenate([bits(r) for r in reach])
        else:
            rtab = np.concatenate([bits(r) for row in reach for r in row])
        vals = vnum = vden = lagr = lam = base = None
        if base_vals is not None:
            vals = np.ascontiguousarray(np.stack([self.vals[v] for v in self.items]))
            base = np.ascontiguousarray(base_vals, dtype=i64)
            if self.count is None:
                vnum = np.ascontiguousarray(np.stack([self.vmax[v][0] for v in self.items]))
                vden = np.ascontiguousarray(np.stack([self.vmax[v][1] for v in self.items]))
            else:
                lagr = np.ascontiguousarray(np.stack([self.lagr[v] for v in self.items]))
                lam = np.ascontiguousarray(self.lam)
        found = kernels.dfs_multisets(
            y, w, b, bn, bd, vals, vnum, vden, lagr, lam, np.ascontiguousarray(rtab),
            total, -1 if self.count is None else self.count,
            -1 if self.bound_sq is None else self.bound_sq, start_b, base)
        return [tuple(self.items[j] for j in idx) for idx in found]

    def run(self, total, start_b, base_vals):
        acc: list = []
        items = self.items
        W = self.w
        count = self.count
        reach = self._reachable(total)
        if kernels.BACKEND == "cython" and (self.bound_sq is None or self.bound_sq < 1 << 40):
            yield from self._run_compiled(total, start_b, base_vals, reach)
            return

        def rec(rem, idx, parts, bsum, part):
            if rem == 0 and (count is None or parts == 0):
                yield tuple(acc)
                return
            if idx < 0:
                return
            if count is not None:
                if parts == 0 or not (reach[parts][idx] >> rem) & 1:
                    return
            elif not (reach[idx] >> rem) & 1:
                return
            cap = items[idx]
            if self.bound_sq is not None:
                bn, bd = self.bmin[cap]
                t = bsum * bd + rem * bn
                if t >= 0 and t * t >= self.bound_sq * bd * bd:
                    return
                if count is not None:
                    # y >= 1 + (y^2 - 1)/(cap + 1) on [1, cap] (chord of sqrt)
                    t2 = (bsum + parts) * (cap + 1) + rem - parts
                    if t2 >= 0 and t2 * t2 >= self.bound_sq * (cap + 1) ** 2:
                        return
                if part is not None:
                    vn, vd = self.vmax[cap]
                    if count is not None:
                        hi = ((part << 8)[:, None] + parts * self.lagr[cap]
                              + rem * self.lam).min(axis=1)
                        if (hi <= 0).any():
                            return
                    elif (part * vd + rem * vn <= 0).any():
                        return
            for j in range(idx, -1, -1):
                y = items[j]
                w = W[y]
                if w > rem:
                    continue
                if count is not None and rem - w > (parts - 1) * w:
                    break
                acc.append(y)
                yield from rec(rem - w, j, None if count is None else parts - 1,
                               bsum + self.b[y],
                               part + self.vals[y] if part is not None else None)
                acc.pop()

        yield from rec(total, len(items) - 1, count, start_b, base_vals)


def _squares_multisets(parts: int, total: int, bound_sq: int | None,
                       eta_exp: int | None = None) -> Iterator[tuple]:
    """Non-increasing tuples of ``parts`` positive ints with squares summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    items = list(range(1, isqrt(total) + 1))
    track = bound_sq is not None and eta_exp is not None
    vals = {y: _theta_vals(y) for y in items} if track else None
    base = np.array([eta_exp * q * q for _, q in _POINTS], dtype=np.int64) if track else None
    srch = _Search(items, lambda y: y * y, lambda y: y, vals, bound_sq, count=parts)
    yield from srch.run(total, 0, base)


def _atom_multisets(weight: int, start_sum: int, bound_sq: int | None,
                    base_nu: Mapping | None = None) -> Iterator[tuple]:
    """Non-increasing atom tuples x_i >= 2 with sum J2(x_i) = weight."""
    if weight < 0:
        return
    if weight == 0:
        yield ()
        return
    items = [x for x in range(2, isqrt(weight) + 2) if jordan2(x) <= weight]
    if not items:
        return
    track = bound_sq is not None and base_nu is not None
    vals = {y: _atom_vals(y) for y in items} if track else None
    base = None
    if track:
        base = np.array([base_nu.get(0, 0) * q * q for _, q in _POINTS], dtype=np.int64) \
            + base_nu.get(1, 0) * _theta_vals(1)
    srch = _Search(items, jordan2, totient, vals, bound_sq)
    yield from srch.run(weight, start_sum, base)


def tb_enumerate(k: int, m: int, A: int, allow_denominator: bool = False,
                 cusp_only: bool = True) -> list[ThetaBlock]:
    r"""All basic theta blocks of weight k, index m, leading q-power q^A.

    Without denominator: phi(0) = 2k and phi(r) counts the parts of a
    non-increasing ``12A - k``-tuple with squares summing to ``2m``.  With
    ``allow_denominator`` the search runs over atom tuples
    ``x_i >= 2`` with ``sum J2(x_i) = 2m - nu(1)`` and the blocks properly
    with denominator (some phi(r) < 0) are appended after the plain ones.
    With ``cusp_only`` (default) only blocks with ``Ord > 0`` are returned.
    The order is lexicographic on the exponent tuple, descending.
    """
    if k < 1 or m < 1 or A < 1:
        raise ValueError("tb_enumerate needs k >= 1, m >= 1, A >= 1")
    ell = 12 * A - k
    if ell < 0:
        raise ValueError(f"12A - k = {ell} < 0: no theta blocks possible")
    # the leading term q^A b(zeta) reaches zeta^(+-B), so a cusp form needs
    # (2B)^2 < 16 A m; both searches prune on a lower bound for 2B
    bound = 16 * A * m if cusp_only else None
    plain = []
    for xs in _squares_multisets(ell, 2 * m, bound, 2 * k):
        phi = {0: 2 * k}
        for x in xs:
            phi[x] = phi.get(x, 0) + 1
        tb = ThetaBlock(MultiplicityFunction(phi))
        if not cusp_only or _is_cusp(tb.mult._phi):
            plain.append(tb)
    if not allow_denominator:
        return plain
    seen = {tb.mult for tb in plain}
    extra = []
    for xs in _atom_multisets(2 * m - ell, ell, bound, {0: 2 * k, 1: ell}):
        nu = {0: 2 * k, 1: ell}
        for x in xs:
            nu[x] = nu.get(x, 0) + 1
        mult = MultiplicityFunction.from_nu(nu)
        if mult in seen:
            continue
        tb = ThetaBlock(mult)
        if not tb.has_denominator:
            continue
        if not cusp_only or _is_cusp(tb.mult._phi):
            extra.append(tb)
            seen.add(mult)
    extra.sort(key=lambda t: tuple(sorted(((-r, v) for r, v in t.phi.items() if r > 0))))
    return plain + extra


def tb_wh_quotient_test(tb) -> bool:
    """True iff nu(r) >= nu(2r) for every r >= 1."""
    tb = tb_invariants(tb)
    nu = tb.mult.nu
    return all(nu.get(r, 0) >= nu.get(2 * r, 0) for r in set(nu) | {r // 2 for r in nu}
               if r >= 1)


def ct_bounds(k: int, N: int) -> list[tuple[int, int]]:
    """Integer pairs (c, t) allowed by the weight/level quadrilateral (N <= 5)."""
    if not 1 <= N <= 5:
        raise ValueError("the (c, t) quadrilateral is only established for 1 <= N <= 5")
    out = []
    c = 1
    while (k - (12 - 2 * N) * c) >= 0:
        lo = max(Fraction(k - 12 * c, 12), Fraction(0))
        hi = Fraction(k - (12 - 2 * N) * c, 12)
        t = lo.numerator // lo.denominator + (1 if lo.denominator != 1 else 0)
        while t <= hi:
            out.append((c, t))
            t += 1
        c += 1
    return out
