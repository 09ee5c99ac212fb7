r"""Borcherds products from weight-0 Jacobi forms.

For ``psi = sum c(n, r) q^n zeta^r`` of weight 0 and index N with integral
singular coefficients, the product

    BL(psi) = q^A zeta^B xi^C  prod (1 - q^n zeta^r xi^(mN))^c(nm, r)

(over m >= 0; n >= 0 if m = 0; r < 0 if m = n = 0) equals
``TB(phi) xi^C exp(-Grit(psi))`` with ``phi(r) = c(0, r)``.  Both forms are
implemented in :func:`bp_expand`; they share nothing beyond coefficient
lookup, so their agreement is a real check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from math import gcd, isqrt
from typing import Callable, Sequence

from .arith import jordan2, sigma0
from .ilp import IlpProblem
from .jacobi import InsufficientPrecision, JacobiTrunc, v_apply
from .series import LaurentPoly, QSeriesTrunc
from .theta import ThetaBlock, tb_expand, tb_invariants

__all__ = [
    "PsiCandidate", "BorcherdsRecord", "classify", "humbert_support", "humbert_pairs",
    "humbert_row", "assemble_ilp", "bp_expand", "cusp_test", "cusp_divisor_data",
    "CuspVerdict", "FJOracle", "involution_scan", "leading_monomial",
]


# ---------------------------------------------------------------------------
# candidates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PsiCandidate:
    """Truncation of a weight-0 index-N weakly holomorphic Jacobi form."""

    N: int
    coeffs: QSeriesTrunc
    singular_vector: tuple = ()
    germ: LaurentPoly | None = None

    @classmethod
    def from_series(cls, N: int, series: QSeriesTrunc, check: bool = True) -> "PsiCandidate":
        if Fraction(series.offset).denominator != 1:
            raise ValueError("psi has integral q-exponents")
        keys = singular_keys(N, int(series.offset))
        sv = tuple(series.coeff(n, r) for n, r in keys)
        germ = series.at(0) if int(series.offset) <= 0 <= series.prec else None
        psi = cls(N, series, sv, germ)
        if check:
            psi.validate()
        return psi

    @property
    def n_min(self) -> int:
        return int(self.coeffs.offset)

    @property
    def prec(self) -> int:
        return int(self.coeffs.prec)

    @cached_property
    def jacobi(self) -> JacobiTrunc:
        return JacobiTrunc(0, self.N, self.coeffs, "weakly-holomorphic")

    def c(self, n: int, r: int):
        """Coefficient c(n, r), using the elliptic relation outside the window."""
        return self.jacobi.coeff_reduced(n, r)

    def validate(self):
        if self.prec < self.N // 4:
            raise InsufficientPrecision(f"psi must reach q^{self.N // 4}", required=self.N // 4)
        for (n, r), v in zip(singular_keys(self.N, self.n_min), self.singular_vector):
            if Fraction(v).denominator != 1:
                raise ValueError(f"singular coefficient c({n},{r}) = {v} is not integral")
        if self.germ is None:
            raise ValueError("psi has no q^0 coefficient in its window")
        a = self.A
        if a.denominator != 1:
            raise ValueError(f"A = {a} is not integral")

    def germ_phi(self) -> dict:
        """phi(r) = c(0, r) for r >= 0."""
        g = self.germ
        out = {0: int(g.coeff(0))}
        if g:
            for r in range(1, g.high + 1):
                if g.coeff(r):
                    out[r] = int(g.coeff(r))
        return out

    @property
    def A(self) -> Fraction:
        phi = self.germ_phi()
        return Fraction(phi[0], 24) + Fraction(sum(v for r, v in phi.items() if r), 12)

    @property
    def B(self) -> Fraction:
        return Fraction(sum(r * v for r, v in self.germ_phi().items()), 2)

    @property
    def weight(self) -> Fraction:
        return Fraction(self.germ.coeff(0), 2)

    def theta_block(self) -> ThetaBlock:
        from .theta import MultiplicityFunction

        return ThetaBlock(MultiplicityFunction(self.germ_phi()))


def singular_keys(N: int, n_min: int) -> list[tuple[int, int]]:
    """(n, r) with 4nN - r^2 <= 0, -N <= r < N, n >= n_min."""
    out = []
    for n in range(n_min, N // 4 + 1):
        for r in range(-N, N):
            if 4 * n * N - r * r <= 0:
                out.append((n, r))
    return out


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def classify(psi: PsiCandidate) -> tuple[int, int, int, int]:
    """``(k, D0, eps, symmetry)`` with ``eps = (-1)^(k + D0)``, symmetry ``(-1)^D0``."""
    c00 = psi.germ.coeff(0)
    if Fraction(c00).denominator != 1 or int(c00) % 2:
        raise ValueError(f"c(0,0) = {c00} is not an even integer")
    k = int(c00) // 2
    D0 = 0
    for n in range(psi.n_min, 0):
        D0 += sigma0(-n) * psi.coeffs.coeff(n, 0)
    D0 = int(D0)
    eps = -1 if (k + D0) % 2 else 1
    sym = -1 if D0 % 2 else 1
    return k, D0, eps, sym


# ---------------------------------------------------------------------------
# Humbert multiplicities
# ---------------------------------------------------------------------------


def _scan_pairs(N: int, t: int, delta: int):
    lo = delta - t
    for n in range(lo, -(-N // 4)):
        if 4 * n >= N:
            break
        for r in range(0, N + 1):
            if 4 * n * N < r * r:
                yield n, r


def _js(N: int, n: int, r: int, t: int, delta: int):
    D = 4 * n * N - r * r
    floor_D = 4 * (delta - t) * N - N * N
    j = 1
    while j * j * D >= floor_D:
        yield j
        j += 1


def humbert_row(coeff: Callable, N: int, n: int, r: int, t: int, delta: int):
    """``(sum_j c(j^2 n, j r), any_nonzero)`` for a single pair."""
    total, nz = 0, False
    for j in _js(N, n, r, t, delta):
        v = coeff(j * j * n, j * r)
        if v:
            nz = True
            total += v
    return total, nz


def humbert_support(psi: PsiCandidate, t: int, delta: int) -> list:
    """Pairs ``(n, r)`` with a nonzero contributing coefficient, with multiplicities.

    ``r`` runs over ``0..N``; ``c(n, -r) = c(n, r)`` in weight 0 makes the
    negative half redundant.
    """
    out = []
    for n, r in _scan_pairs(psi.N, t, delta):
        tot, nz = humbert_row(psi.c, psi.N, n, r, t, delta)
        if nz:
            out.append(((n, r), _as_int(tot)))
    return out


def humbert_pairs(series: Sequence[PsiCandidate], t: int, delta: int) -> list:
    """Union (in scan order) of the pairs needing a check for any of ``series``."""
    N = series[0].N
    out = []
    for n, r in _scan_pairs(N, t, delta):
        for s in series:
            if humbert_row(s.c, N, n, r, t, delta)[1]:
                out.append((n, r))
                break
    return out


def _as_int(v):
    f = Fraction(v)
    return int(f) if f.denominator == 1 else f


def assemble_ilp(psi0: PsiCandidate, H0: Sequence[PsiCandidate], pairs, t: int, delta: int,
                 cap: int = 10_000) -> IlpProblem:
    """``M[(n,r), i] = sum_j c_{h_i}(j^2 n, j r)`` and ``b[(n,r)]`` likewise for psi0."""
    M, b = [], []
    for n, r in pairs:
        row = []
        for h in H0:
            v = humbert_row(h.c, psi0.N, n, r, t, delta)[0]
            if Fraction(v).denominator != 1:
                raise ValueError(f"non-integral Humbert entry at ({n},{r}); "
                                 "the H0 basis is not singular-integral")
            row.append(int(v))
        v = humbert_row(psi0.c, psi0.N, n, r, t, delta)[0]
        if Fraction(v).denominator != 1:
            raise ValueError(f"non-integral Humbert entry of psi0 at ({n},{r})")
        M.append(row)
        b.append(int(v))
    return IlpProblem(M, b, cap=cap, d=len(H0))


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


@dataclass
class BorcherdsRecord:
    theta_block: ThetaBlock
    psi: PsiCandidate
    c: int
    t: int
    k: int = 0
    D0: int = 0
    eps: int = 1
    symmetry: int = 1
    humbert: list = field(default_factory=list)
    fj: list = field(default_factory=list)
    cusp: object = None
    confirmation: object = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def build(cls, theta_block, psi: PsiCandidate, c: int, t: int, delta: int | None = None,
              **kw) -> "BorcherdsRecord":
        k, D0, eps, sym = classify(psi)
        if delta is None:
            delta = 0 if t in (0, 1) else 1
        hum = humbert_support(psi, t, delta)
        return cls(tb_invariants(theta_block), psi, c, t, k, D0, eps, sym, hum, **kw)

    @property
    def N(self) -> int:
        return self.psi.N

    @property
    def humbert_nonnegative(self) -> bool:
        return all(v >= 0 for _, v in self.humbert)


# ---------------------------------------------------------------------------
# graded (q, zeta, xi) series helpers
# ---------------------------------------------------------------------------


def _add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _mul(a, b):
    if a is None or b is None:
        return None
    return a * b


def _trunc(s, prec):
    if s is None:
        return None
    return s.truncate_abs(prec) if s.prec > prec else s


def _graded_exp(S: dict, M: int, precs: list) -> dict:
    """exp of a graded series with zero grade 0; E[0] = 1 is implicit."""
    E = {}
    for j in range(1, M + 1):
        acc = None
        for ell in range(1, j + 1):
            s = S.get(ell)
            if s is None:
                continue
            term = s.scale(ell) if j == ell else _mul(s.scale(ell), E.get(j - ell))
            acc = _add(acc, term)
        if acc is not None:
            acc = _trunc(acc.scale(Fraction(1, j)), precs[j])
        E[j] = acc
    return E


def _graded_mul(F: dict, G: dict, M: int, precs: list) -> dict:
    """(1 + F)(1 + G) - 1 through grade M."""
    H = {}
    for g in range(1, M + 1):
        acc = _add(F.get(g), G.get(g))
        for i in range(1, g):
            acc = _add(acc, _mul(F.get(i), G.get(g - i)))
        H[g] = _trunc(acc, precs[g]) if acc is not None else None
    return H


# ---------------------------------------------------------------------------
# product expansion
# ---------------------------------------------------------------------------


def _grade_precs(targets: list, depth: int) -> list:
    """Precision needed at each grade of the xi-part so grade j reaches targets[j]."""
    M = len(targets) - 1
    return [max(targets[j] + depth * (j - g) for j in range(g, M + 1)) for g in range(M + 1)]


def _section(psi: PsiCandidate, m: int, prec: int, D_min: int) -> QSeriesTrunc:
    """``sum_{n, r} c(n m, r) q^n zeta^r`` through ``q^prec``."""
    N = psi.N
    n_lo = -((-psi.n_min) // m) if psi.n_min < 0 else 0
    # c(nm, r) = 0 unless 4 n m N - r^2 >= D_min
    rows = {}
    for n in range(n_lo, prec + 1):
        lim = 4 * n * m * N - D_min
        if lim < 0:
            continue
        R = isqrt(lim)
        row = {}
        for r in range(-R, R + 1):
            v = psi.c(n * m, r)
            if v:
                row[r] = v
        if row:
            rows[n] = row
    lo = min(rows, default=n_lo)
    return QSeriesTrunc(lo, [LaurentPoly(rows.get(n, {})) for n in range(lo, prec + 1)],
                        prec - lo)


def _min_disc(psi: PsiCandidate) -> int:
    best = 0
    for n, r, _ in psi.coeffs.items():
        d = 4 * int(n) * psi.N - r * r
        best = min(best, d)
    return best


def _psi_depth_needed(route: str, precs: list, M: int) -> int:
    if route == "exp":
        return max([ell * precs[ell] for ell in range(1, M + 1)], default=0)
    return max([m * precs[m] for m in range(1, M + 1)], default=0)


def bp_expand(rec, xi_order: int, q_order, zeta_range: tuple | None = None,
              route: str = "exp") -> list[JacobiTrunc]:
    """Fourier-Jacobi coefficients ``phi_c, ..., phi_{c + xi_order}`` of BL(psi).

    ``q_order`` is an absolute q-precision, either one integer for every
    coefficient or a list with one entry per coefficient.  ``route`` is
    ``"exp"`` (TB * exp(-Grit psi)) or ``"product"`` (the triple product).
    Raises :class:`InsufficientPrecision` with the needed psi depth.
    """
    psi = rec.psi
    tb = tb_invariants(rec.theta_block) if rec.theta_block is not None else psi.theta_block()
    N, c = psi.N, rec.c
    M = xi_order
    targets = [q_order] * (M + 1) if isinstance(q_order, int) else list(q_order)
    if len(targets) != M + 1:
        raise ValueError("q_order list must have xi_order + 1 entries")
    A = int(tb.A)
    depth = max(0, -psi.n_min)
    rel = [tg - A for tg in targets]
    precs = _grade_precs(rel, depth)
    need = _psi_depth_needed(route, precs, M)
    if psi.prec < need:
        raise InsufficientPrecision(f"psi must reach q^{need} for xi-order {M}",
                                    required=need)
    if route == "exp":
        S = {}
        for ell in range(1, M + 1):
            v = v_apply(psi.jacobi, ell, precs[ell]).series
            S[ell] = -_trunc(v, precs[ell])
        E = _graded_exp(S, M, precs)
    elif route == "product":
        D_min = _min_disc(psi)
        E = {}
        for m in range(1, M + 1):
            K = M // m
            p1 = _section(psi, m, precs[m], D_min)
            L = {}
            for k in range(1, K + 1):
                pk = p1.q_dilate(k).map_zeta(k) if k > 1 else p1
                L[m * k] = _trunc(pk.scale(Fraction(-1, k)), precs[m * k])
            F = _graded_exp(L, M, precs)
            E = _graded_mul(E, F, M, precs) if E else F
    else:
        raise ValueError(f"unknown route {route!r}")
    top_tb = max(targets[j] + depth * j for j in range(M + 1))
    TB = tb_expand(tb, top_tb - A)
    out = []
    for j in range(M + 1):
        if j == 0:
            s = TB.truncate_abs(targets[0])
        else:
            e = E.get(j)
            if e is None:
                s = QSeriesTrunc.zero(A, targets[j] - A)
            else:
                s = (TB * e).truncate_abs(targets[j])
        if s.prec < targets[j]:
            raise InsufficientPrecision(f"FJ coefficient {c + j} reached only q^{s.prec}",
                                        required=targets[j])
        if not s.is_integral:
            raise ArithmeticError(f"FJ coefficient {c + j} is not integral")
        if zeta_range is not None:
            s = _zeta_window(s, *zeta_range)
        out.append(JacobiTrunc(int(tb.k), (c + j) * N, s, "weak"))
    return out


def _zeta_window(s: QSeriesTrunc, lo: int, hi: int) -> QSeriesTrunc:
    rows = []
    for n in range(int(s.offset), int(s.prec) + 1):
        row = s.at(n)
        rows.append(LaurentPoly({r: row.coeff(r) for r in range(lo, hi + 1) if row.coeff(r)}))
    return QSeriesTrunc(s.offset, rows, int(s.prec - s.offset))


def leading_monomial(fj: Sequence[JacobiTrunc], c: int):
    """(q-exponent, top zeta-exponent, xi index c, coefficient) of the first FJ coefficient."""
    s = fj[0].series
    a = int(s.offset)
    row = s.at(a)
    return a, row.high, c, row.coeff(row.high)


# ---------------------------------------------------------------------------
# involution conditions
# ---------------------------------------------------------------------------


class FJOracle:
    """Fourier coefficients a(n, r, j) of ``sum_j phi_j xi^(jN)`` from FJ truncations."""

    def __init__(self, fj: Sequence[JacobiTrunc], c: int, N: int, symmetry: int = 1):
        self.fj = list(fj)
        self.c = c
        self.N = N
        self.symmetry = symmetry

    @property
    def top(self) -> int:
        return self.c + len(self.fj) - 1

    def raw(self, n: int, r: int, j: int):
        if j < self.c:
            return 0
        if j > self.top:
            e = InsufficientPrecision(f"needs FJ coefficient xi^{j * self.N}", required=j)
            e.axis = "xi"
            raise e
        f = self.fj[j - self.c]
        if n > f.prec:
            raise InsufficientPrecision(f"needs q^{n} in FJ coefficient {j}", required=n)
        return f.series.coeff(n, r)

    def __call__(self, n: int, r: int, j: int):
        """Coefficient with the involution swap toward the smaller xi index."""
        if j > n:
            return self.symmetry * self.raw(j, r, n)
        return self.raw(n, r, j)


def involution_scan(fj: Sequence[JacobiTrunc], c: int, N: int, sign: int) -> list:
    """Index triples where ``a(n, r, j) != sign * a(j, r, n)`` on the computed window.

    For ``sign = -1`` this includes nonzero diagonal coefficients ``a(n, r, n)``.
    """
    bad = []
    top = c + len(fj) - 1
    for j in range(c, top + 1):
        f = fj[j - c]
        for n, r, v in f.series.items():
            n = int(n)
            if n == j:
                if sign == -1 and v:
                    bad.append((n, r, j))
                continue
            if not (c <= n <= top):
                continue
            g = fj[n - c]
            if j > g.prec:
                continue
            w = g.series.coeff(j, r)
            if v != sign * w:
                bad.append((n, r, j))
    return bad


# ---------------------------------------------------------------------------
# cuspidality
# ---------------------------------------------------------------------------


def _itilde(ell: int) -> Fraction:
    if ell == 1:
        return Fraction(1)
    if ell == 2:
        return Fraction(3)
    return Fraction(jordan2(ell), 2)


def cusp_divisor_data(k: int, N: int) -> list[tuple]:
    """Tuples ``(m, ell, delta, Itilde, n_max)`` for the divisors that need checking."""
    out = []
    for m in range(1, N + 1):
        if N % m:
            continue
        ell = gcd(N // m, m)
        if k % 2 and ell <= 2:
            continue
        delta = N // (m * ell)
        it = _itilde(ell)
        nmax = (k * it) // 12
        out.append((m, ell, delta, int(it) if it.denominator == 1 else it, int(nmax)))
    return out


@dataclass
class CuspVerdict:
    is_cusp: bool | None
    tuples: list
    checked: list  # ((n_q, r, j), value, how)
    required_xi: int | None = None
    required_q: int | None = None

    def __bool__(self):
        return bool(self.is_cusp)

    @property
    def deferred(self) -> bool:
        return self.is_cusp is None


def cusp_indices(k: int, N: int) -> list[tuple]:
    """``(m, n, (a, r, j))``: q-exponent a, zeta-exponent r and xi index j of each index."""
    out = []
    for m, ell, delta, _, nmax in cusp_divisor_data(k, N):
        for n in range(nmax + 1):
            a = n * delta
            r = -2 * m * n * delta
            j = m * n // ell
            out.append((m, n, (a, r, j)))
    return out


def cusp_test(coeff_oracle, k: int, N: int, symmetry: int) -> CuspVerdict:
    """Vanishing of the finitely many coefficients that characterize cusp forms.

    ``coeff_oracle(a, r, j)`` returns the coefficient of ``q^a zeta^r xi^(jN)``
    and may raise :class:`InsufficientPrecision`; the verdict then reports the
    xi index or q-power still needed.  Indices are swapped toward the smaller
    xi index, and for antisymmetric forms diagonal indices vanish outright.
    """
    tuples = cusp_divisor_data(k, N)
    checked = []
    req_xi = req_q = None
    nonzero = False
    for m, n, (a, r, j) in cusp_indices(k, N):
        if a == j and symmetry == -1:
            checked.append(((a, r, j), 0, "involution"))
            continue
        aa, jj, how = (j, a, "swapped") if j > a else (a, j, "direct")
        try:
            v = coeff_oracle(aa, r, jj)
        except InsufficientPrecision as e:
            if getattr(e, "axis", "q") == "xi":
                req_xi = max(req_xi or 0, jj)
            else:
                req_q = max(req_q or 0, aa)
            continue
        if how == "swapped":
            v = symmetry * v
        checked.append(((a, r, j), v, how))
        if v:
            nonzero = True
    if nonzero:
        return CuspVerdict(False, tuples, checked, req_xi, req_q)
    if req_xi is not None or req_q is not None:
        return CuspVerdict(None, tuples, checked, req_xi, req_q)
    return CuspVerdict(True, tuples, checked)


def cusp_requirements(k: int, N: int, c: int, symmetry: int) -> dict:
    """Largest q-exponent needed at each FJ index j for :func:`cusp_test`."""
    req: dict = {}
    for m, n, (a, r, j) in cusp_indices(k, N):
        if a == j and symmetry == -1:
            continue
        aa, jj = (j, a) if j > a else (a, j)
        if jj < c:
            continue
        req[jj] = max(req.get(jj, -10**9), aa)
    return req
