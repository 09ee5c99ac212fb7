r"""Truncated Jacobi forms: Hecke operators V_l, Gritsenko lifts, bases, confirmation.

A :class:`JacobiTrunc` is a weight, an index and a :class:`QSeriesTrunc`
with integer offset.  Coefficients are addressed by absolute exponents
``c(n, r)``; :meth:`JacobiTrunc.coeff_reduced` uses the elliptic relation
``c(n, r) = c(n - lam*r + lam^2*m, r - 2*lam*m)`` to reach coefficients
beyond the stored window.

Bases of ``J^cusp_{k,m}`` come from three sources.  ``"generators"`` is
complete: every weak Jacobi form of even weight is a polynomial in
``phi_{-2,1}`` and ``phi_{0,1}`` over ``M_* = C[E4, E6]`` (odd weight adds a
factor ``phi_{-1,2}``), and the cusp forms are the weak forms whose
coefficients with ``4nm - r^2 <= 0`` vanish.  ``"theta-blocks"`` uses
basic theta blocks without denominator and is usually incomplete.  Files
in the text format below slot in externally computed bases::

    k=<int> m=<int> qorder=<int>
    element <id>
    <n> <r> <coeff>        (coeff an integer or p/q)
    ...
    end
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .arith import divisors, jordan2, sigma
from .linalg import NotInSpan, independent_rows, left_kernel, membership
from .modforms import delta, eisenstein, eta_power
from .series import (LaurentPoly, NotDivisible, QSeriesTrunc, cyclotomic, lp_divide,
                     lp_exact_divide, series_divide)
from .theta import (ThetaBlock, tb_enumerate, tb_expand, tb_invariants,
                    tb_wh_quotient_test)

__all__ = [
    "JacobiTrunc", "BasisTrunc", "InsufficientPrecision", "Confirmed", "Inconclusive",
    "Refuted", "v_apply", "grit_lift", "delta_power_basis", "divisibility_bound",
    "confirm_truncation", "confirm_quotient_methods", "provision_basis",
    "weak_generators", "weak_basis", "cusp_basis_from_generators", "read_basis_file",
    "write_basis_file", "v2_quotient", "inflation_quotient", "confirmation_index",
    "series_window_matrix", "QuotientWitness", "jacobi_from_theta_block",
    "cyclotomic_factorization", "inflations_from_leading",
]

KINDS = ("cusp", "weak", "weakly-holomorphic")


class InsufficientPrecision(ValueError):
    """An operation needs coefficients beyond the stored truncation."""

    def __init__(self, message: str, required=None):
        super().__init__(message)
        self.required = required


# ---------------------------------------------------------------------------
# the truncated Jacobi form type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JacobiTrunc:
    """A Jacobi form of weight ``k`` and index ``m`` known through ``q^prec``."""

    k: int
    m: int
    series: QSeriesTrunc
    kind: str = "weak"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if Fraction(self.series.offset).denominator != 1:
            raise ValueError("Jacobi forms have integral q-exponents")
        if self.m < 0:
            raise ValueError("index must be nonnegative")

    @property
    def offset(self) -> int:
        return int(self.series.offset)

    @property
    def prec(self) -> int:
        return int(self.series.prec)

    def coeff(self, n: int, r: int):
        if n > self.prec:
            raise InsufficientPrecision(f"c({n},{r}) is beyond q^{self.prec}", required=n)
        return self.series.coeff(n, r)

    def reduce_index(self, n: int, r: int) -> tuple[int, int, int]:
        """Representative ``(n', r', sign)`` with ``0 <= r' <= m`` in the class of (n, r)."""
        m = self.m
        if m == 0:
            return n, r, 1
        rr = r % (2 * m)
        if rr > m:
            rr -= 2 * m
        D = 4 * n * m - r * r
        sign = 1
        if rr < 0:
            rr = -rr
            sign = -1 if self.k % 2 else 1
        n2 = (rr * rr + D) // (4 * m)
        return n2, rr, sign

    def coeff_reduced(self, n: int, r: int):
        """c(n, r) through the elliptic and sign symmetries when (n, r) is out of window."""
        if self.offset <= n <= self.prec:
            return self.series.coeff(n, r)
        n2, r2, s = self.reduce_index(n, r)
        if n2 > self.prec:
            raise InsufficientPrecision(f"c({n},{r}) reduces to q^{n2} beyond q^{self.prec}",
                                        required=n2)
        return s * self.series.coeff(n2, r2)

    def truncate(self, prec: int) -> "JacobiTrunc":
        return JacobiTrunc(self.k, self.m, self.series.truncate_abs(prec), self.kind)

    def check_symmetry(self) -> bool:
        """Elliptic and sign symmetry of every stored coefficient reachable in the window."""
        m, s = self.m, self.series
        par = -1 if self.k % 2 else 1
        for n, r, c in s.items():
            if s.coeff(n, -r) != par * c:
                return False
            if m == 0:
                continue
            # lam ranges over shifts keeping n' inside the window
            lam = 1
            for direction in (1, -1):
                lam = direction
                while True:
                    n2 = n - lam * r + lam * lam * m
                    r2 = r - 2 * lam * m
                    if n2 > self.prec:
                        break
                    if s.coeff(n2, r2) != c:
                        return False
                    lam += direction
        return True

    def check_cusp(self) -> bool:
        """Stored support satisfies 4nm - r^2 > 0 and the offset is >= 1."""
        if self.series.is_zero():
            return True
        if self.offset < 1:
            return False
        return all(4 * n * self.m - r * r > 0 for n, r, _ in self.series.items())

    def __add__(self, other: "JacobiTrunc") -> "JacobiTrunc":
        self._same_space(other)
        return JacobiTrunc(self.k, self.m, self.series + other.series, _join(self.kind, other.kind))

    def __sub__(self, other: "JacobiTrunc") -> "JacobiTrunc":
        self._same_space(other)
        return JacobiTrunc(self.k, self.m, self.series - other.series, _join(self.kind, other.kind))

    def __neg__(self):
        return JacobiTrunc(self.k, self.m, -self.series, self.kind)

    def scale(self, c) -> "JacobiTrunc":
        return JacobiTrunc(self.k, self.m, self.series.scale(c), self.kind)

    def __mul__(self, other):
        if isinstance(other, JacobiTrunc):
            kind = "cusp" if "cusp" in (self.kind, other.kind) and \
                "weakly-holomorphic" not in (self.kind, other.kind) and \
                (self.kind != "weak" or other.kind != "weak") else _join(self.kind, other.kind)
            return JacobiTrunc(self.k + other.k, self.m + other.m, self.series * other.series,
                               kind)
        return self.scale(other)

    def __truediv__(self, other: "JacobiTrunc") -> "JacobiTrunc":
        return JacobiTrunc(self.k - other.k, self.m - other.m,
                           series_divide(self.series, other.series), "weakly-holomorphic")

    def _same_space(self, other):
        if (self.k, self.m) != (other.k, other.m):
            raise ValueError(f"J_{{{self.k},{self.m}}} vs J_{{{other.k},{other.m}}}")


def _join(a: str, b: str) -> str:
    order = {"cusp": 0, "weak": 1, "weakly-holomorphic": 2}
    return a if order[a] >= order[b] else b


def jacobi_from_theta_block(tb, q_prec: int) -> JacobiTrunc:
    """Expand a basic holomorphic theta block through absolute ``q^q_prec``."""
    tb = tb_invariants(tb)
    if not tb.is_basic:
        raise ValueError(f"{tb} is not a basic theta block")
    rel = q_prec - int(tb.A)
    s = tb_expand(tb, max(rel, 0)) if rel >= 0 else QSeriesTrunc.zero(tb.A, rel)
    from .theta import tb_ord
    kind = "cusp" if tb_ord(tb).is_cusp else "weak"
    return JacobiTrunc(tb.weight, tb.index, s, kind)


# ---------------------------------------------------------------------------
# Hecke operators and lifts
# ---------------------------------------------------------------------------


def v_apply(f: JacobiTrunc, ell: int, q_order: int | None = None) -> JacobiTrunc:
    r"""Index-raising Hecke operator ``V_ell``.

    ``c_{f|V_l}(n, r) = sum_{a | (n, r, l)} a^(k-1) c_f(n l / a^2, r / a)``.
    The output is known through ``q^floor(prec / l)``; when ``q_order`` is
    given the input must reach ``q^(l * q_order)``.  For ``k <= 0`` the
    factors ``a^(k-1)`` are rational and the result carries a denominator.
    """
    if ell < 1:
        raise ValueError("V_l needs l >= 1")
    if ell == 1:
        return f if q_order is None else f.truncate(min(q_order, f.prec))
    k = f.k
    s = f.series
    o, P = f.offset, f.prec
    if q_order is not None and P < ell * q_order:
        raise InsufficientPrecision(
            f"V_{ell} through q^{q_order} needs the input through q^{ell * q_order}, "
            f"have q^{P}", required=ell * q_order)
    n_hi = P // ell if P >= 0 else -((-P + ell - 1) // ell)
    if q_order is not None:
        n_hi = min(n_hi, q_order)
    ds = divisors(ell)
    n_lo = min(-((-o * a * a) // ell) for a in ds)
    blk, zlo, den = s.block()
    if n_hi < n_lo:
        # no support up to the known precision: zero through q^n_hi
        return JacobiTrunc(k, f.m * ell, QSeriesTrunc.zero(n_hi, 0), _vkind(f))
    if blk.shape[1] == 0:
        return JacobiTrunc(k, f.m * ell, QSeriesTrunc.zero(n_lo, n_hi - n_lo), _vkind(f))
    zhi = zlo + blk.shape[1] - 1
    D = ell ** max(0, 1 - k)
    out_lo = min(a * zlo for a in ds)
    out_hi = max(a * zhi for a in ds)
    out = np.zeros((n_hi - n_lo + 1, out_hi - out_lo + 1), dtype=object)
    src_blk = blk.astype(object)
    for a in ds:
        w = a ** (k - 1) * D if k >= 1 else (ell // a) ** (1 - k)
        first = n_lo + (-n_lo) % a
        ns = np.arange(first, n_hi + 1, a)
        if ns.size == 0:
            continue
        src = ns * ell // (a * a) - o
        ok = (src >= 0) & (src < blk.shape[0])
        ns, src = ns[ok], src[ok]
        if ns.size == 0:
            continue
        c0 = a * zlo - out_lo
        cols = c0 + a * np.arange(blk.shape[1])
        out[np.ix_(ns - n_lo, cols)] += w * src_blk[src]
    series = QSeriesTrunc._from_block(n_lo, n_hi - n_lo, out, out_lo, den * D)
    return JacobiTrunc(k, f.m * ell, series, _vkind(f))


def _vkind(f: JacobiTrunc) -> str:
    return f.kind


def grit_lift(phi: JacobiTrunc, xi_order: int, q_order: int) -> list[JacobiTrunc]:
    """Fourier-Jacobi coefficients ``phi|V_l`` (l = 1..xi_order) through ``q^q_order``."""
    out = []
    for ell in range(1, xi_order + 1):
        out.append(v_apply(phi, ell, q_order).truncate(q_order))
    return out


# ---------------------------------------------------------------------------
# divisibility bound
# ---------------------------------------------------------------------------


def divisibility_bound(tb) -> int:
    """Largest n for which baby-block divisibility of g_n must be checked.

    ``max_{r >= 1, nu(r) > 0} floor((k + nu(r) - 1) / 12 * r * J2(r))``;
    ``r * J2(r)`` is the index of the principal congruence subgroup of level r.
    """
    tb = tb_invariants(tb)
    k = tb.weight
    best = None
    for r, v in tb.nu.items():
        if r >= 1 and v > 0:
            val = ((k + v - 1) * r * jordan2(r)) // 12
            best = val if best is None else max(best, val)
    if best is None:
        return 0
    return best


# ---------------------------------------------------------------------------
# weak Jacobi generators and complete cusp bases
# ---------------------------------------------------------------------------


_GEN_CACHE: dict = {}


def weak_generators(L: int) -> dict[str, JacobiTrunc]:
    """``phi_{-2,1}``, ``phi_{0,1}``, ``phi_{-1,2}`` through ``q^L``.

    ``phi_{-2,1} = theta^2 / eta^6`` and ``phi_{-1,2} = theta(tau, 2z) / eta^3``
    are theta blocks; ``phi_{0,1} = 12 phi_{-2,1} * wp / (2 pi i)^2`` uses the
    Weierstrass function ``wp/(2pi i)^2 = 1/12 + zeta/(1-zeta)^2 +
    sum_{n >= 1} sum_{d | n} d (zeta^d - 2 + zeta^-d) q^n``.
    """
    if L in _GEN_CACHE:
        return _GEN_CACHE[L]
    a = tb_expand({0: -4, 1: 2}, L)
    c = tb_expand({0: -2, 2: 1}, L)
    rows = [LaurentPoly.constant(1)]
    for n in range(1, L + 1):
        t = {}
        for d in divisors(n):
            t[d] = t.get(d, 0) + 12 * d
            t[-d] = t.get(-d, 0) + 12 * d
            t[0] = t.get(0, 0) - 24 * d
        rows.append(LaurentPoly(t))
    wp = QSeriesTrunc(0, rows, L)
    b = LaurentPoly({-1: 1, 0: -2, 1: 1})
    # zeta/(1-zeta)^2 = 1/b, so 12 * phi_{-2,1} * zeta/(1-zeta)^2 = 12 * phi_{-2,1} / b
    quot = QSeriesTrunc(0, [lp_exact_divide(a[n], b) for n in range(L + 1)], L)
    p01 = a * wp + quot.scale(12)
    out = {
        "phi_-2_1": JacobiTrunc(-2, 1, a, "weak"),
        "phi_0_1": JacobiTrunc(0, 1, p01, "weak"),
        "phi_-1_2": JacobiTrunc(-1, 2, c, "weak"),
    }
    _GEN_CACHE[L] = out
    return out


def _modular_basis(w: int, L: int) -> list[tuple[str, QSeriesTrunc]]:
    """Integral basis ``Delta^j E4^a E6^b`` of M_w through q^L (triangular in q)."""
    if w < 0 or w % 2 or w == 2:
        return []
    dim = w // 12 + (0 if w % 12 == 2 else 1)
    out = []
    for j in range(dim):
        rest = w - 12 * j
        b = 1 if rest % 4 == 2 else 0
        a = (rest - 6 * b) // 4
        s = QSeriesTrunc.one(L)
        if a:
            s = s * eisenstein(4, L) ** a
        if b:
            s = s * eisenstein(6, L)
        if j:
            s = s * delta(L).truncate_abs(L) ** j if j else s
            s = s.truncate_abs(L)
        out.append((f"D^{j}E4^{a}E6^{b}", s))
    return out


def weak_basis(k: int, m: int, L: int) -> list[tuple[str, JacobiTrunc]]:
    """Spanning set of ``J^weak_{k,m}`` through q^L (a basis by the structure theorem)."""
    g = weak_generators(L)
    if k % 2:
        if m < 2:
            return []
        inner = weak_basis(k + 1, m - 2, L)
        c = g["phi_-1_2"]
        return [("phi_-1_2*" + tag, JacobiTrunc(k, m, c.series * f.series, "weak"))
                for tag, f in inner]
    a, b = g["phi_-2_1"].series, g["phi_0_1"].series
    apow = [QSeriesTrunc.one(L)]
    bpow = [QSeriesTrunc.one(L)]
    for _ in range(m):
        apow.append(apow[-1] * a)
        bpow.append(bpow[-1] * b)
    out = []
    for i in range(m + 1):
        mods = _modular_basis(k + 2 * i, L)
        if not mods:
            continue
        P = apow[i] * bpow[m - i]
        for tag, f in mods:
            out.append((f"{tag}*A^{i}B^{m - i}", JacobiTrunc(k, m, f * P, "weak")))
    return out


def _singular_classes(m: int) -> list[tuple[int, int]]:
    """(n, r) with 0 <= r <= m, n >= 0 and 4nm - r^2 <= 0."""
    return [(n, r) for r in range(m + 1) for n in range(0, r * r // (4 * m) + 1)]


def cusp_basis_from_generators(k: int, m: int, q_prec: int) -> "BasisTrunc":
    """Complete basis of ``J^cusp_{k,m}`` through ``q^q_prec`` from weak generators."""
    if m < 1:
        return BasisTrunc(k, m, q_prec, [], [])
    L = max(q_prec, m // 4)
    gens = weak_basis(k, m, L)
    if not gens:
        return BasisTrunc(k, m, q_prec, [], [])
    sing = _singular_classes(m)
    S = [[f.series.coeff(n, r) for n, r in sing] for _, f in gens]
    combos = left_kernel(S)
    elems, prov = [], []
    series = [f.series for _, f in gens]
    for x in combos:
        acc = None
        for c, s in zip(x, series):
            if c:
                t = s.scale(c)
                acc = t if acc is None else acc + t
        acc = acc.truncate_abs(q_prec)
        g = JacobiTrunc(k, m, acc, "cusp")
        elems.append(g)
        prov.append("generators")
    basis = BasisTrunc(k, m, q_prec, elems, prov)
    return basis.reduced()


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------


def series_window_matrix(series: Sequence[QSeriesTrunc], n_lo: int, n_hi: int,
                         r_lo: int | None = None, r_hi: int | None = None):
    """Rows of integer coefficients on the window [n_lo, n_hi] x [r_lo, r_hi].

    Returns ``(matrix, dens, (r_lo, r_hi))`` where row i equals ``dens[i]``
    times the coefficients of ``series[i]``.
    """
    if r_lo is None or r_hi is None:
        lo, hi = 0, -1
        for s in series:
            if not s.is_zero():
                a, b = s.zeta_range
                lo, hi = (a, b) if hi < lo else (min(lo, a), max(hi, b))
        r_lo = lo if r_lo is None else r_lo
        r_hi = hi if r_hi is None else r_hi
    W = max(r_hi - r_lo + 1, 0)
    H = n_hi - n_lo + 1
    M = np.zeros((len(series), H * W), dtype=object)
    dens = []
    for i, s in enumerate(series):
        if s.prec < n_hi:
            raise InsufficientPrecision(f"series known through q^{s.prec}, window needs "
                                        f"q^{n_hi}", required=n_hi)
        blk, zlo, den = s.block()
        dens.append(den)
        if blk.size == 0:
            continue
        o = int(s.offset)
        grid = np.zeros((H, W), dtype=object)
        for n in range(max(o, n_lo), min(n_hi, o + blk.shape[0] - 1) + 1):
            row = blk[n - o]
            a = max(zlo, r_lo)
            b = min(zlo + blk.shape[1] - 1, r_hi)
            if b >= a:
                grid[n - n_lo, a - r_lo: b - r_lo + 1] = row[a - zlo: b - zlo + 1]
            if np.any(row[:max(0, r_lo - zlo)] != 0) or \
                    np.any(row[max(0, r_hi - zlo + 1):] != 0):
                raise ValueError("series has support outside the requested zeta window")
        if o < n_lo and np.any(blk[:min(n_lo - o, blk.shape[0])] != 0):
            raise ValueError("series has support below the requested q window")
        M[i] = grid.reshape(-1)
    return M, dens, (r_lo, r_hi)


@dataclass
class BasisTrunc:
    """Truncations of linearly independent Jacobi forms of weight k, index m."""

    k: int
    m: int
    q_order: int
    elements: list
    provenance: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.provenance) < len(self.elements):
            self.provenance = list(self.provenance) + ["unknown"] * (
                len(self.elements) - len(self.provenance))

    def __len__(self):
        return len(self.elements)

    @property
    def rank(self) -> int:
        return len(self.elements)

    def matrix(self, n_lo: int = 1, n_hi: int | None = None):
        n_hi = self.q_order if n_hi is None else n_hi
        return series_window_matrix([e.series for e in self.elements], n_lo, n_hi)

    def reduced(self) -> "BasisTrunc":
        """Drop dependent elements (exact rank on the stored window)."""
        if not self.elements:
            return self
        lo = min(e.offset for e in self.elements)
        M, _, _ = self.matrix(min(lo, 1), self.q_order)
        keep = independent_rows(M)
        return BasisTrunc(self.k, self.m, self.q_order, [self.elements[i] for i in keep],
                          [self.provenance[i] for i in keep])

    def truncate(self, q_prec: int) -> "BasisTrunc":
        """Shorter truncation (elements may become dependent; call :meth:`reduced`)."""
        return BasisTrunc(self.k, self.m, q_prec, [e.truncate(q_prec) for e in self.elements],
                          list(self.provenance))


def _theta_block_elements(k: int, m: int, q_prec: int, max_A: int | None):
    out = []
    A = 1
    top = q_prec if max_A is None else min(max_A, q_prec)
    while A <= top:
        if 12 * A - k < 0:
            A += 1
            continue
        for tb in tb_enumerate(k, m, A, allow_denominator=False, cusp_only=True):
            out.append((f"theta-block {tb}", jacobi_from_theta_block(tb, q_prec)))
        A += 1
    return out


def provision_basis(k: int, m: int, q_order: int, sources: Iterable = (),
                    max_theta_A: int | None = 2) -> BasisTrunc:
    """Maximal linearly independent set of ``J^cusp_{k,m}`` truncations through ``q^q_order``.

    ``sources`` may contain ``"generators"``, ``"theta-blocks"``, file paths,
    or ready-made :class:`BasisTrunc` objects.  Elements are kept greedily in
    source order, so earlier sources take precedence.
    """
    cand: list = []
    for src in sources:
        if isinstance(src, BasisTrunc):
            b = src
            if (b.k, b.m) != (k, m):
                raise ValueError(f"basis for J_{{{b.k},{b.m}}} offered for J_{{{k},{m}}}")
            if b.q_order < q_order:
                raise InsufficientPrecision(f"basis known through q^{b.q_order}",
                                            required=q_order)
            cand += [(p, e.truncate(q_order)) for p, e in zip(b.provenance, b.elements)]
        elif src == "generators":
            b = cusp_basis_from_generators(k, m, q_order)
            cand += [("generators", e) for e in b.elements]
        elif src == "theta-blocks":
            cand += _theta_block_elements(k, m, q_order, max_theta_A)
        else:
            b = read_basis_file(src)
            if (b.k, b.m) != (k, m):
                raise ValueError(f"basis file {src} holds J_{{{b.k},{b.m}}}, "
                                 f"wanted J_{{{k},{m}}}")
            if b.q_order < q_order:
                raise InsufficientPrecision(f"basis file {src} known through q^{b.q_order}",
                                            required=q_order)
            cand += [(f"file {src}:{p}", e.truncate(q_order))
                     for p, e in zip(b.provenance, b.elements)]
    if not cand:
        return BasisTrunc(k, m, q_order, [], [])
    M, _, _ = series_window_matrix([e.series for _, e in cand], 1, q_order)
    keep = independent_rows(M)
    return BasisTrunc(k, m, q_order, [cand[i][1] for i in keep], [cand[i][0] for i in keep])


# ---------------------------------------------------------------------------
# basis files
# ---------------------------------------------------------------------------


_HEADER = re.compile(r"^k=(-?\d+)\s+m=(\d+)\s+qorder=(-?\d+)$")
_COEF = re.compile(r"^-?\d+(/\d+)?$")


def read_basis_file(path) -> BasisTrunc:
    """Parse a basis file; raises ValueError on any malformed or trailing content."""
    text = Path(path).read_text()
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty basis file")
    h = _HEADER.match(lines[0])
    if not h:
        raise ValueError(f"{path}: bad header {lines[0]!r}")
    k, m, qorder = int(h.group(1)), int(h.group(2)), int(h.group(3))
    elems, prov = [], []
    i = 1
    while i < len(lines):
        parts = lines[i].split()
        if len(parts) != 2 or parts[0] != "element":
            raise ValueError(f"{path}: expected 'element <id>', got {lines[i]!r}")
        ident = parts[1]
        i += 1
        coeffs: dict = {}
        while True:
            if i >= len(lines):
                raise ValueError(f"{path}: element {ident} is missing 'end'")
            if lines[i] == "end":
                i += 1
                break
            toks = lines[i].split()
            if len(toks) != 3 or not _COEF.match(toks[2]):
                raise ValueError(f"{path}: bad coefficient line {lines[i]!r}")
            try:
                n, r = int(toks[0]), int(toks[1])
            except ValueError:
                raise ValueError(f"{path}: bad coefficient line {lines[i]!r}") from None
            if n > qorder:
                raise ValueError(f"{path}: coefficient at q^{n} beyond qorder {qorder}")
            c = Fraction(toks[2])
            if (n, r) in coeffs:
                raise ValueError(f"{path}: duplicate coefficient ({n},{r}) in {ident}")
            if c:
                coeffs[(n, r)] = c
            i += 1
        lo = min((n for n, _ in coeffs), default=qorder)
        rows: dict = {}
        for (n, r), c in coeffs.items():
            rows.setdefault(n - lo, {})[r] = c
        s = QSeriesTrunc(lo, [LaurentPoly(rows.get(j, {})) for j in range(qorder - lo + 1)],
                         qorder - lo)
        kind = "cusp" if lo >= 1 else "weak"
        elems.append(JacobiTrunc(k, m, s, kind))
        prov.append(ident)
    return BasisTrunc(k, m, qorder, elems, prov)


def write_basis_file(basis: BasisTrunc, path) -> None:
    out = [f"k={basis.k} m={basis.m} qorder={basis.q_order}"]
    for ident, e in zip(basis.provenance, basis.elements):
        tag = re.sub(r"\s+", "_", str(ident))
        out.append(f"element {tag}")
        for n, r, c in sorted(e.series.items()):
            if n <= basis.q_order:
                out.append(f"{n} {r} {c}")
        out.append("end")
    Path(path).write_text("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# Delta-power quotients and confirmation
# ---------------------------------------------------------------------------


def delta_power_basis(i: int, basis12i: BasisTrunc, N: int, top: int | None = None
                      ) -> list[QSeriesTrunc]:
    """Quotients ``g / Delta^i`` through ``q^top`` (default ``floor(N/4)``)."""
    if i < 1:
        raise ValueError("i must be positive")
    top = N // 4 if top is None else top
    need = top + i
    if basis12i.q_order < need:
        raise InsufficientPrecision(f"J^cusp_{{{12 * i},{N}}} basis needs q^{need}",
                                    required=need)
    # offset i; relative order need covers basis elements starting below q^i
    D = eta_power(24 * i, need)
    out = []
    for g in basis12i.elements:
        s = g.series.truncate_abs(need)
        q = series_divide(s, D)
        out.append(q.truncate_abs(top))
    return out


def _support_min_disc(series: QSeriesTrunc, N: int):
    best = None
    for n, r, _ in series.items():
        d = 4 * int(n) * N - r * r
        best = d if best is None else min(best, d)
    return best


def confirmation_index(series: QSeriesTrunc, N: int) -> int:
    """Least i >= 0 with i > -D(n, r)/(4N) on the support and i >= 1 - n_min."""
    if series.is_zero():
        return 0
    dmin = _support_min_disc(series, N)
    i = max(0, (-dmin) // (4 * N) + 1)
    return max(i, 1 - int(series.offset))


@dataclass(frozen=True)
class Confirmed:
    """A certificate that a truncation extends to a weakly holomorphic form."""

    method: str
    i: int | None = None
    combination: tuple = ()
    witnesses: tuple = ()
    detail: str = ""

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    i: int | None = None

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Refuted:
    """No extension exists (only with a basis known to be complete)."""

    reason: str
    i: int | None = None

    def __bool__(self):
        return False


def _as_series(psi) -> tuple[QSeriesTrunc, int | None]:
    if isinstance(psi, QSeriesTrunc):
        return psi, None
    if isinstance(psi, JacobiTrunc):
        return psi.series, psi.m
    if hasattr(psi, "coeffs"):
        return psi.coeffs, psi.N
    return psi.series, getattr(psi, "N", None)


def confirm_truncation(psi, N: int, basis12i, t: int | None = None, subtract=None,
                       assume_complete: bool = False):
    """Test whether a truncation lies in the Q-span of ``g / Delta^i``.

    ``basis12i`` is a :class:`BasisTrunc` for the required ``i``, a mapping
    ``i -> BasisTrunc``, or a callable ``(k, m, q_prec) -> BasisTrunc``.
    With ``subtract`` (a series known to extend, e.g. ``(phi|V2)/phi``) the
    difference is tested instead, which usually needs a smaller ``i``.
    """
    series, _ = _as_series(psi)
    target = series
    if subtract is not None:
        sub, _ = _as_series(subtract)
        top = min(target.prec, sub.prec)
        target = target.truncate_abs(top) - sub.truncate_abs(top)
    top = int(target.prec)
    i = confirmation_index(target, N)
    if i == 0:
        # a holomorphic weight-0 form with positive valuation is zero
        ok = target.is_zero()
        return Confirmed("delta-quotient", 0, (), (), "zero form") if ok else \
            Inconclusive("weight 0 truncation with i = 0 is nonzero", 0)
    if isinstance(basis12i, BasisTrunc):
        basis = basis12i
        if (basis.k, basis.m) != (12 * i, N):
            raise InsufficientPrecision(
                f"confirmation needs i = {i} (J^cusp_{{{12 * i},{N}}}), basis is "
                f"J^cusp_{{{basis.k},{basis.m}}}", required=i)
    elif isinstance(basis12i, Mapping):
        if i not in basis12i:
            raise InsufficientPrecision(f"no basis for i = {i}", required=i)
        basis = basis12i[i]
    else:
        basis = basis12i(12 * i, N, top + i)
    quots = delta_power_basis(i, basis, N, top)
    lo = min([int(target.offset), 1 - i] + [int(q.offset) for q in quots if not q.is_zero()])
    rows = quots + [target]
    M, dens, _ = series_window_matrix(rows, lo, top)
    vecs = [[Fraction(x, d) for x in row] for row, d in zip(M, dens)]
    res = membership(vecs[-1], vecs[:-1])
    if isinstance(res, NotInSpan):
        if assume_complete:
            return Refuted(f"not in the span of J^cusp_{{{12 * i},{N}}}/Delta^{i}", i)
        return Inconclusive(f"not in the span of the supplied J^cusp_{{{12 * i},{N}}} "
                            f"basis (rank {basis.rank})", i)
    method = "delta-quotient" if subtract is None else "delta-quotient-subtract"
    return Confirmed(method, i, tuple(res), tuple(basis.provenance),
                     f"J^cusp_{{{12 * i},{N}}}/Delta^{i}")


# ---------------------------------------------------------------------------
# quotient methods
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuotientWitness:
    """A weakly holomorphic quotient: ``(phi|V2)/phi`` or ``Theta/phi``."""

    kind: str  # "v2" or "inflation"
    numerator: ThetaBlock
    denominator: ThetaBlock
    series: QSeriesTrunc
    sign: int = 1

    def describe(self) -> str:
        if self.kind == "v2":
            s = "-" if self.sign < 0 else ""
            return f"{s}({self.denominator}|V2)/({self.denominator})"
        return f"({self.numerator})/({self.denominator})"


def v2_quotient(tb, top: int, signed: bool = True) -> QuotientWitness:
    """``(-1)^A (phi|V2)/phi`` through ``q^top``; needs nu(2r) <= nu(r) for all r.

    With ``phi = q^A b(zeta)(1 - G q + ...)`` the signed quotient has
    q^0 coefficient ``+G`` when A = 1 and principal part ``q^-1`` when A = 2.
    ``signed=False`` returns the plain quotient.
    """
    tb = tb_invariants(tb)
    if not tb_wh_quotient_test(tb):
        raise ValueError(f"(phi|V2)/phi is not weakly holomorphic for {tb}")
    A = int(tb.A)
    phi = jacobi_from_theta_block(tb, 2 * (top + A))
    v2 = v_apply(phi, 2, top + A)
    q = series_divide(v2.series.truncate_abs(top + A), phi.series.truncate_abs(top + 2 * A))
    if signed and A % 2:
        q = -q
    return QuotientWitness("v2", tb, tb, q.truncate_abs(top), -1 if signed and A % 2 else 1)


def inflation_quotient(theta, phi, top: int) -> QuotientWitness:
    """``Theta/phi`` through ``q^top`` for an inflation Theta of phi."""
    Th, ph = tb_invariants(theta), tb_invariants(phi)
    if Th.weight != ph.weight:
        raise ValueError("inflation must have the weight of phi")
    nu_t, nu_p = Th.nu, ph.nu
    if any(nu_t.get(r, 0) < v for r, v in nu_p.items() if r >= 1):
        raise ValueError(f"baby block of {ph} does not divide that of {Th}")
    A = int(ph.A)
    num = jacobi_from_theta_block(Th, top + A)
    den = jacobi_from_theta_block(ph, top + A)
    q = series_divide(num.series, den.series)
    return QuotientWitness("inflation", Th, ph, q.truncate_abs(top))


def cyclotomic_factorization(p: LaurentPoly):
    """``(sign, shift, {r: e})`` with ``p = sign zeta^shift prod Phi_r^e``, or None."""
    if p.is_zero():
        return None
    from sympy import Poly, factor_list, symbols

    X = symbols("X")
    lo = p.low
    f = Poly([int(p.coeff(e)) if Fraction(p.coeff(e)).denominator == 1 else None
              for e in range(p.high, lo - 1, -1)], X) if p.is_integral else None
    if f is None:
        return None
    content, facs = factor_list(f.as_expr(), X)
    if content not in (1, -1):
        return None
    out: dict = {}
    shift = lo
    for g, e in facs:
        gp = Poly(g, X)
        if gp.degree() == 1 and gp.all_coeffs() == [1, 0]:
            shift += e
            continue
        if not gp.is_cyclotomic:
            return None
        d = gp.degree()
        coeffs = [int(v) for v in reversed(gp.all_coeffs())]
        lp = LaurentPoly({i: v for i, v in enumerate(coeffs) if v})
        r = next((n for n in _inverse_totient(d) if cyclotomic(n) in (lp, -lp)), None)
        if r is None:
            return None
        out[r] = out.get(r, 0) + e
    sign = int(content)
    check = LaurentPoly.monomial(shift, sign)
    for r, e in out.items():
        check = check * cyclotomic(r) ** e
    if check != p:
        # sympy normalizes factor signs; fold the discrepancy into the sign
        if check == -p:
            sign = -sign
        else:
            return None
    return sign, shift, out


def _inverse_totient(d: int) -> list[int]:
    # totient(n) >= sqrt(n / 2), so n <= 2 d^2
    from .arith import totient

    return [n for n in range(1, 2 * d * d + 3) if totient(n) == d]


def inflations_from_leading(phi, target: LaurentPoly, N: int) -> list:
    """Inflations Theta of phi whose quotient Theta/phi starts with ``target`` at q^0.

    ``Theta/phi`` is a product of atoms ``a_r`` (r >= 2) of total index N and
    its q^0 coefficient is ``zeta^-B prod Phi_r^nu(r)``; so the atoms are read
    off a cyclotomic factorization of ``target``.
    """
    from .theta import MultiplicityFunction, atom, tb_ord

    fac = cyclotomic_factorization(target)
    if fac is None:
        return []
    sign, shift, exps = fac
    if 1 in exps or sign != 1:
        return []
    if sum(e * jordan2(r) for r, e in exps.items()) != 2 * N:
        return []
    ph = tb_invariants(phi)
    mult = ph.mult
    for r, e in exps.items():
        for _ in range(e):
            mult = mult * atom(r)
    Th = ThetaBlock(mult)
    if not Th.is_holomorphic or not tb_ord(Th).is_cusp:
        return []
    quot = ThetaBlock(Th.mult / ph.mult)
    if quot.baby != target:
        return []
    return [Th]


def confirm_quotient_methods(psi, phi, pool: Sequence[QuotientWitness]):
    """Search the span of weakly holomorphic quotients for the truncation.

    A match on the whole window proves existence; failure proves nothing.
    """
    series, _ = _as_series(psi)
    if not pool:
        return Inconclusive("empty quotient pool")
    top = int(min([series.prec] + [w.series.prec for w in pool]))
    rows = [w.series.truncate_abs(top) for w in pool] + [series.truncate_abs(top)]
    lo = min(int(s.offset) for s in rows if not s.is_zero()) if any(
        not s.is_zero() for s in rows) else 0
    M, dens, _ = series_window_matrix(rows, lo, top)
    vecs = [[Fraction(x, d) for x in row] for row, d in zip(M, dens)]
    res = membership(vecs[-1], vecs[:-1])
    if isinstance(res, NotInSpan):
        return Inconclusive("not in the span of the quotient pool")
    kinds = sorted({w.kind for w in pool if res[pool.index(w)] != 0})
    method = "+".join({"v2": "v2-quotients", "inflation": "inflation"}[k] for k in kinds)
    used = tuple(w.describe() for w, c in zip(pool, res) if c != 0)
    coeffs = tuple(c for c in res if c != 0)
    return Confirmed(method or "zero", None, coeffs, used)
