"""The search for Borcherds products with a given leading (c, t) type.

For each basic cuspidal theta block ``phi`` of weight k, index cN and
leading power ``q^(c+t)``, the search builds every truncation ``psi`` of
a weight-0 index-N form that could satisfy ``BL(psi) = phi xi^(cN) + ...``
and then tries to confirm each one:

* multiply a complete cusp basis of index (c+1)N down to the forms whose
  Fourier coefficients are multiples of the baby block of phi (a cheap
  necessary condition for divisibility by phi),
* divide by phi and saturate the resulting lattice on the singular
  coordinates,
* intersect the affine lattice of quotients with constant term G(phi)
  with the Humbert nonnegativity cone (an ILP),
* confirm candidates, optionally test cuspidality.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import Sequence

from .borcherds import (BorcherdsRecord, CuspVerdict, FJOracle, PsiCandidate, assemble_ilp,
                        bp_expand, cusp_requirements, cusp_test, humbert_pairs,
                        involution_scan, singular_keys)
from .ilp import Capped, Complete, Unbounded, ilp_enumerate
from .jacobi import (BasisTrunc, Confirmed, Inconclusive, InsufficientPrecision, Refuted,
                     confirm_quotient_methods, confirm_truncation, confirmation_index,
                     divisibility_bound, inflation_quotient, inflations_from_leading,
                     provision_basis, read_basis_file, series_window_matrix, v2_quotient)
from .linalg import NotInSpan, hnf, hnf_rows, left_kernel, membership, rank, saturate
from .series import LaurentPoly, QSeriesTrunc, lp_divide, lp_exact_divide, series_divide
from .theta import (ThetaBlock, parse_theta_block, tb_enumerate, tb_expand, tb_invariants,
                    tb_wh_quotient_test)

__all__ = ["SearchConfig", "SearchOutcome", "BlockDiagnostics", "Abort", "BasisShortfall",
           "BasisProvider", "offset_shape", "run_search", "confirm_candidate",
           "cusp_check", "STRATEGIES"]

log = logging.getLogger(__name__)

STRATEGIES = ("subtract", "delta", "inflation", "v2-pool", "divisibility-bound")
STEP5_POLICIES = ("eschew", "abort", "flag")
BASIS_DIR_ENV = "PARAMODULAR_BASIS_DIR"


# ---------------------------------------------------------------------------
# configuration and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    k: int
    N: int
    c: int
    t: int
    nextra: int = 0
    cap: int = 10_000
    basis_sources: tuple = ("generators",)
    strategies: tuple = STRATEGIES
    assume_complete_basis: bool = False
    skip_cusp_test: bool = False
    step5_policy: str = "eschew"
    include_denominator: bool = True
    blocks: tuple | None = None
    threads: int = 1
    max_cap_doublings: int = 6
    generator_max_index: int = 160
    delta_max_i: int = 4

    def __post_init__(self):
        if self.c < 1 or self.t < 0 or self.k < 1 or self.N < 1:
            raise ValueError("need c >= 1, t >= 0, k >= 1, N >= 1")
        if self.nextra < 0:
            raise ValueError("nextra must be nonnegative")
        if self.cap < 1:
            raise ValueError("cap must be positive")
        if self.step5_policy not in STEP5_POLICIES:
            raise ValueError(f"step5_policy must be one of {STEP5_POLICIES}")
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad:
            raise ValueError(f"unknown confirmation strategies {bad}")
        object.__setattr__(self, "basis_sources", tuple(self.basis_sources))
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.blocks is not None:
            # bare strings take the eta exponent 2k
            blocks = tuple(parse_theta_block(b, weight=self.k) if isinstance(b, str) else b
                           for b in self.blocks)
            object.__setattr__(self, "blocks", tuple(str(tb_invariants(b)) for b in blocks))

    @property
    def delta(self) -> int:
        return offset_shape(self.t)[0]

    @property
    def top(self) -> int:
        """Absolute q-order of the step-1 basis truncations."""
        return self.N // 4 + self.c + self.t + self.nextra


@dataclass(frozen=True)
class Abort:
    block: str | None
    step: str
    reason: str
    remedy: str


class BasisShortfall(RuntimeError):
    """No source can provide ``J^cusp_{k,m}`` through ``q^q_order``."""

    def __init__(self, k: int, m: int, q_order: int, detail: str = ""):
        self.k, self.m, self.q_order = k, m, q_order
        msg = f"missing basis of J^cusp_{{{k},{m}}} through q^{q_order}"
        super().__init__(msg + (f" ({detail})" if detail else ""))
        self.remedy = (f"supply a basis file with header 'k={k} m={m} qorder={q_order}' "
                       f"(or larger qorder) in the basis directory")


@dataclass
class BlockDiagnostics:
    block: str
    step4_dim: int = 0
    step5_rank: int = 0
    step5_strict_independent: bool | None = None
    dim_H: int = 0
    has_psi0: bool = False
    dim_H0: int = 0
    ilp_status: str = ""
    ilp_solutions: int = 0
    cap: int = 0
    refuted: int = 0
    unconfirmed: int = 0
    divisibility_bound: int = 0
    flags: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SearchOutcome:
    config: SearchConfig
    records: list = field(default_factory=list)
    aborts: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    step1_rank: int = 0
    step2_rank: int = 0
    blocks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.aborts

    def diagnostics_for(self, block) -> BlockDiagnostics:
        key = str(tb_invariants(block))
        return next(d for d in self.diagnostics if d.block == key)

    def records_for(self, block) -> list:
        key = str(tb_invariants(block))
        return [r for r in self.records if str(r.theta_block) == key]


def offset_shape(t: int) -> tuple[int, int | None, str]:
    """``(delta, expected symmetry, principal-part shape)`` for offset t.

    Symmetry is +1, -1, or None when both occur (t >= 3).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0, 1, "G + O(q)"
    if t == 1:
        return 0, -1, "q^-1 + G + O(q)"
    sym = 1 if t == 2 else None
    return 1, sym, f"sum_{{n={1 - t}}}^{{-1}} psi_n q^n + G + O(q)"


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------


def _file_header(path: Path):
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    parts = dict(p.split("=", 1) for p in line.split() if "=" in p)
                    return int(parts["k"]), int(parts["m"]), int(parts["qorder"])
    except (OSError, KeyError, ValueError):
        return None
    return None


class BasisProvider:
    """Resolves cusp bases from generators, basis files or basis directories.

    Results are cached per ``(k, m)`` and truncated on reuse.
    """

    def __init__(self, sources: Sequence, generator_max_index: int = 160):
        self.sources = list(sources)
        self.generator_max_index = generator_max_index
        self._cache: dict = {}

    def complete(self, k: int, m: int) -> bool:
        """True if the generator source applies (its bases are complete)."""
        return "generators" in self.sources and m <= self.generator_max_index

    def _files(self, k: int, m: int) -> list:
        out = []
        for src in self.sources:
            if isinstance(src, BasisTrunc) or src in ("generators", "theta-blocks"):
                continue
            p = Path(src)
            cands = sorted(p.iterdir()) if p.is_dir() else [p]
            for f in cands:
                if f.is_file() and _file_header(f) is not None and _file_header(f)[:2] == (k, m):
                    out.append(f)
        return out

    def __call__(self, k: int, m: int, q_order: int) -> BasisTrunc:
        hit = self._cache.get((k, m))
        if hit is not None and hit.q_order >= q_order:
            return hit.truncate(q_order).reduced() if hit.q_order > q_order else hit
        used, notes = [], []
        for src in self.sources:
            if isinstance(src, BasisTrunc):
                if (src.k, src.m) == (k, m) and src.q_order >= q_order:
                    used.append(src)
            elif src == "generators":
                if m <= self.generator_max_index:
                    used.append("generators")
                else:
                    notes.append(f"index {m} exceeds the generator limit "
                                 f"{self.generator_max_index}")
            elif src == "theta-blocks":
                used.append(src)
        for f in self._files(k, m):
            hdr = _file_header(f)
            if hdr[2] >= q_order:
                used.append(str(f))
            else:
                notes.append(f"{f} reaches only q^{hdr[2]}")
        if not used:
            raise BasisShortfall(k, m, q_order, "; ".join(notes))
        basis = provision_basis(k, m, q_order, used)
        self._cache[(k, m)] = basis
        return basis


# ---------------------------------------------------------------------------
# small exact helpers
# ---------------------------------------------------------------------------


def _combine(coeffs, series: Sequence[QSeriesTrunc], offset, order) -> QSeriesTrunc:
    acc = QSeriesTrunc.zero(offset, order)
    for a, s in zip(coeffs, series):
        if a:
            acc = acc + s.scale(a)
    return acc


def _integral(s: QSeriesTrunc) -> QSeriesTrunc:
    return s if s.is_integral else s.scale(s.den)


def _coords(targets, W) -> list:
    """Rational coordinates of each target in the row space of W (rows independent)."""
    out = []
    for v in targets:
        x = membership(v, W)
        if isinstance(x, NotInSpan):  # pragma: no cover - targets come from span(W)
            raise ArithmeticError("vector left the span it was built from")
        out.append(x)
    return out


def _solve_integer(W, g):
    """Integer x with x W = g, and a basis of the integer left kernel of W.

    Uses a row HNF ``H = U W``; returns ``(x or None, kernel rows)``.
    """
    H, U = hnf(W)
    rk = sum(1 for row in H if any(row))
    kernel = [list(U[i]) for i in range(rk, len(U))]
    y = [0] * rk
    ncol = len(g)
    for i in range(rk):
        p = next(j for j in range(ncol) if H[i][j])
        rem = g[p] - sum(y[a] * H[a][p] for a in range(i))
        if rem % H[i][p]:
            return None, kernel
        y[i] = rem // H[i][p]
    if any(sum(y[a] * H[a][j] for a in range(rk)) != g[j] for j in range(ncol)):
        return None, kernel
    x = [sum(y[a] * U[a][i] for a in range(rk)) for i in range(len(U))]
    return x, kernel


def _reduce_mod_hnf(v, B):
    """Reduce the integer vector v modulo the row lattice in HNF ``B``."""
    v = list(v)
    for row in B:
        p = next(j for j, a in enumerate(row) if a)
        q = v[p] // row[p]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return v


# ---------------------------------------------------------------------------
# confirmation and cusp test of single candidates
# ---------------------------------------------------------------------------


class _Confirmer:
    """Confirmation strategies with per-run caches."""

    def __init__(self, cfg: SearchConfig, provider: BasisProvider):
        self.cfg = cfg
        self.provider = provider
        self._v2_cache = None
        self._quotients: dict = {}

    def v2_pool(self, top: int) -> list:
        if self._v2_cache is None or self._v2_cache[0] < top:
            cfg = self.cfg
            pool = []
            if 12 - cfg.k >= 0:
                for tb in tb_enumerate(cfg.k, cfg.N, 1, allow_denominator=True):
                    if tb_wh_quotient_test(tb):
                        pool.append(v2_quotient(tb, top))
            self._v2_cache = (top, pool)
        return self._v2_cache[1]

    def own_v2(self, phi: ThetaBlock, top: int):
        key = ("v2", str(phi), top)
        if key not in self._quotients:
            ok = self.cfg.c == 1 and tb_wh_quotient_test(phi)
            self._quotients[key] = v2_quotient(phi, top) if ok else None
        return self._quotients[key]

    def confirm(self, psi: PsiCandidate, phi: ThetaBlock, L1: int):
        cfg = self.cfg
        notes = []
        refuted = None
        for strat in cfg.strategies:
            try:
                res = getattr(self, "_" + strat.replace("-", "_"))(psi, phi, L1)
            except InsufficientPrecision as e:
                res = Inconclusive(f"{strat}: {e}")
            except BasisShortfall as e:
                res = Inconclusive(f"{strat}: {e}")
            if isinstance(res, Confirmed):
                return res
            if isinstance(res, Refuted):
                refuted = res
                break
            if res is not None:
                notes.append(res.reason if isinstance(res, Inconclusive) else str(res))
        if refuted is not None:
            return refuted
        return Inconclusive("; ".join(notes) or "no strategy applied")

    # strategies return None when not applicable

    def _divisibility_bound(self, psi, phi, L1):
        bound = divisibility_bound(phi)
        if L1 >= bound:
            return Confirmed("divisibility-bound", None, (), (),
                             f"baby-block divisibility checked through q^{L1} >= {bound}")
        return Inconclusive(f"divisibility bound {bound} exceeds q^{L1}")

    def _delta(self, psi, phi, L1, subtract=None):
        cfg = self.cfg
        s = psi.coeffs.truncate_abs(cfg.N // 4)
        if subtract is not None:
            s = s - subtract.truncate_abs(cfg.N // 4)
        i = confirmation_index(s, cfg.N)
        if i > cfg.delta_max_i:
            return Inconclusive(f"delta method needs i = {i} > {cfg.delta_max_i}", i)
        complete = cfg.assume_complete_basis or self.provider.complete(12 * max(i, 1), cfg.N)
        # with subtract, the subtracted quotient is a genuine form, so a
        # refuted difference refutes psi as well
        return confirm_truncation(psi.coeffs.truncate_abs(cfg.N // 4), cfg.N, self.provider,
                                  subtract=subtract, assume_complete=complete)

    def _subtract(self, psi, phi, L1):
        w = self.own_v2(phi, psi.prec)
        if w is None:
            return None
        N = self.cfg.N
        s = psi.coeffs.truncate_abs(N // 4)
        if confirmation_index(s - w.series.truncate_abs(N // 4), N) >= confirmation_index(s, N):
            return None  # no gain over the plain delta method
        return self._delta(psi, phi, L1, subtract=w.series)

    def _inflation(self, psi, phi, L1):
        cfg = self.cfg
        top = psi.prec
        pool, targets = [], []
        g0 = psi.germ
        if cfg.t == 0:
            targets.append(g0)
        w = self.own_v2(phi, top)
        if w is not None:
            pool.append(w)
            targets += [w.series.at(0) - g0, g0 - w.series.at(0)]
        seen = set()
        for tg in targets:
            if tg.is_zero():
                continue
            for Th in inflations_from_leading(phi, tg, cfg.N):
                if Th in seen:
                    continue
                seen.add(Th)
                pool.append(inflation_quotient(Th, phi, top))
        if not any(x.kind == "inflation" for x in pool):
            return None
        return confirm_quotient_methods(psi, phi, pool)

    def _v2_pool(self, psi, phi, L1):
        if self.cfg.t != 0:
            return None
        pool = self.v2_pool(psi.prec)
        if not pool:
            return None
        return confirm_quotient_methods(psi, phi, pool)


def confirm_candidate(psi: PsiCandidate, phi, cfg: SearchConfig,
                      provider: BasisProvider | None = None):
    """Run the configured confirmation strategies on one candidate."""
    provider = provider or BasisProvider(cfg.basis_sources, cfg.generator_max_index)
    L1 = cfg.top
    return _Confirmer(cfg, provider).confirm(psi, tb_invariants(phi), L1)


def cusp_check(rec: BorcherdsRecord, route: str = "exp") -> CuspVerdict:
    """Cusp test of a record from its own psi truncation.

    Expands exactly the Fourier-Jacobi coefficients that the test reads.
    When the truncation is too short the verdict is deferred and carries
    ``required_q`` for the psi depth (absolute q-order) that would suffice.
    """
    k, N, c, sym = rec.k, rec.N, rec.c, rec.symmetry
    req = cusp_requirements(k, N, c, sym)
    A = int(tb_invariants(rec.theta_block).A)
    M = max(req, default=c) - c
    targets = [max(req.get(c + g, A), A) for g in range(M + 1)]
    try:
        fj = bp_expand(rec, M, targets, route=route)
    except InsufficientPrecision as e:
        return CuspVerdict(None, [], [], None, e.required)
    rec.fj = fj
    rec.extra["involution_violations"] = len(involution_scan(fj, c, N, sym))
    return cusp_test(FJOracle(fj, c, N, sym), k, N, sym)


# ---------------------------------------------------------------------------
# the search
# ---------------------------------------------------------------------------


@dataclass
class _Shared:
    cfg: SearchConfig
    gs: list  # step-2 series, integral, offset >= c + delta
    confirmer: _Confirmer


def _step12(cfg: SearchConfig, provider: BasisProvider):
    c, N, d = cfg.c, cfg.N, cfg.delta
    L1 = cfg.top
    basis = provider((cfg.k), (c + 1) * N, L1)
    series = [_integral(e.series.truncate_abs(L1)) for e in basis.elements]
    r1 = len(series)
    lo_zero = c + d - 1
    if lo_zero >= 1 and series:
        M, _, _ = series_window_matrix(series, 1, lo_zero)
        combos = left_kernel(M) if M.shape[1] else [[int(i == j) for j in range(r1)]
                                                    for i in range(r1)]
        series = [_combine(x, series, 1, L1 - 1) for x in combos]
    return r1, series


def _step4(gs, b: LaurentPoly, n_lo: int, n_hi: int):
    if not gs:
        return []
    deg = b.high - b.low
    rows = []
    for g in gs:
        row = []
        for n in range(n_lo, n_hi + 1):
            gn = g.at(n)
            rem = lp_divide(gn, b)[1] if gn else LaurentPoly()
            row += [rem.coeff(e) for e in range(deg)]
        rows.append(row)
    if deg == 0:
        return [[int(i == j) for j in range(len(gs))] for i in range(len(gs))]
    den = 1
    for row in rows:
        for v in row:
            den = lcm(den, Fraction(v).denominator)
    rows = [[int(Fraction(v) * den) for v in row] for row in rows]
    return left_kernel(rows)


def _process_block(sh: _Shared, phi: ThetaBlock):
    cfg = sh.cfg
    N, c, t = cfg.N, cfg.c, cfg.t
    d = cfg.delta
    L1 = cfg.top
    name = str(phi)
    diag = BlockDiagnostics(name, divisibility_bound=divisibility_bound(phi))
    aborts, records = [], []
    b = phi.baby
    # step 4
    X = _step4(sh.gs, b, c + d, L1)
    diag.step4_dim = len(X)
    if not X:
        diag.ilp_status = "empty"
        return diag, records, aborts
    gphi = [_combine(x, sh.gs, c + d, L1 - c - d) for x in X]
    # step 5
    rel = N // 4 + t - d + cfg.nextra
    phit = tb_expand(phi, rel)
    unit = QSeriesTrunc(phit.offset, [lp_exact_divide(phit.at(phit.offset + n), b)
                                      for n in range(rel + 1)], rel)
    hs = []
    for g in gphi:
        g = g.truncate_abs(L1)
        gb = QSeriesTrunc(c + d, [lp_exact_divide(g.at(c + d + n), b) for n in range(L1 - c - d + 1)],
                          L1 - c - d)
        h = series_divide(gb, unit)
        hs.append(h)
    keys = singular_keys(N, d - t)
    W = [[h.coeff(n, r) for n, r in keys] for h in hs]
    if any(Fraction(v).denominator != 1 for row in W for v in row):
        raise ArithmeticError("step-5 quotients are not integral")
    W = [[int(v) for v in row] for row in W]
    diag.step5_rank = rank(W)
    if diag.step5_rank < len(W):
        aborts.append(Abort(name, "step5-dependence",
                            f"singular projections of {len(W)} step-4 quotients have rank "
                            f"{diag.step5_rank}", f"rerun with nextra > {cfg.nextra}"))
        diag.ilp_status = "aborted"
        return diag, records, aborts
    if cfg.step5_policy != "eschew":
        strict = [j for j, (n, r) in enumerate(keys) if 4 * n * N - r * r < 0]
        ok = rank([[row[j] for j in strict] for row in W]) == len(W)
        diag.step5_strict_independent = ok
        if not ok:
            if cfg.step5_policy == "abort":
                aborts.append(Abort(name, "step5-strict-dependence",
                                    "projections to negative-discriminant coordinates are "
                                    "dependent", f"rerun with nextra > {cfg.nextra}"))
                diag.ilp_status = "aborted"
                return diag, records, aborts
            diag.flags.append("step5-strict-dependence")
    S = saturate(W)
    diag.dim_H = len(S)
    # step 6: constant term G
    G = phi.germ
    Hcoef = _coords(S, W)
    h_top = int(hs[0].prec)
    h_lo = d - t

    def series_of(coefs):
        return _combine(coefs, hs, h_lo, h_top - h_lo)

    Hseries = [series_of(a) for a in Hcoef]
    r_lo = min([G.low] + [s.at(0).low for s in Hseries if s.at(0)])
    r_hi = max([G.high] + [s.at(0).high for s in Hseries if s.at(0)])
    rows0 = [[s.at(0).coeff(r) for r in range(r_lo, r_hi + 1)] for s in Hseries]
    den = 1
    for row in rows0:
        for v in row:
            den = lcm(den, Fraction(v).denominator)
    W0 = [[int(Fraction(v) * den) for v in row] for row in rows0]
    g0 = [int(G.coeff(r) * den) for r in range(r_lo, r_hi + 1)]
    x0, kernel = _solve_integer(W0, g0)
    if x0 is None:
        diag.ilp_status = "no-psi0"
        return diag, records, aborts
    diag.has_psi0 = True
    nk = len(keys)
    v0 = [sum(x0[i] * S[i][j] for i in range(len(S))) for j in range(nk)]
    # step 7
    K = [[sum(kv[i] * S[i][j] for i in range(len(S))) for j in range(nk)] for kv in kernel]
    S0 = saturate(K) if K else []
    B0 = hnf_rows(S0) if S0 else []
    v0 = _reduce_mod_hnf(v0, B0)
    diag.dim_H0 = len(B0)
    psi0_s = series_of(_coords([v0], W)[0])
    H0_s = [series_of(a) for a in _coords(B0, W)]
    psi0 = PsiCandidate.from_series(N, psi0_s, check=False)
    H0 = [PsiCandidate.from_series(N, s, check=False) for s in H0_s]
    if psi0_s.at(0) != G:  # pragma: no cover - by construction
        raise ArithmeticError("psi0 lost its constant term")
    # step 8 / 9
    pairs = humbert_pairs([psi0] + H0, t, d)
    cap = cfg.cap
    for attempt in range(cfg.max_cap_doublings + 1):
        prob = assemble_ilp(psi0, H0, pairs, t, d, cap=cap)
        res = ilp_enumerate(prob)
        diag.cap = cap
        diag.ilp_status = res.status
        if isinstance(res, Unbounded):
            aborts.append(Abort(name, "step8-unbounded",
                                f"Humbert cone contains the ray {list(res.direction)}",
                                f"rerun with nextra > {cfg.nextra}"))
            return diag, records, aborts
        diag.ilp_solutions = len(res.solutions)
        recs, refuted, unconfirmed = [], 0, 0
        for x in res.solutions:
            s = psi0_s
            for a, h in zip(x, H0_s):
                if a:
                    s = s + h.scale(a)
            psi = PsiCandidate.from_series(N, s)
            status = sh.confirmer.confirm(psi, phi, L1)
            if isinstance(status, Refuted):
                refuted += 1
                continue
            if not isinstance(status, Confirmed):
                unconfirmed += 1
            rec = BorcherdsRecord.build(phi, psi, c, t, d, confirmation=status)
            rec.extra["ilp_solution"] = list(x)
            exp_sym = offset_shape(t)[1]
            if exp_sym is not None and rec.symmetry != exp_sym:
                rec.extra["unexpected_symmetry"] = True
            recs.append(rec)
        diag.refuted, diag.unconfirmed = refuted, unconfirmed
        if isinstance(res, Complete):
            records = recs
            break
        # capped
        if refuted:
            aborts.append(Abort(name, "step9-capped-with-false-candidate",
                                f"{cap} ILP solutions, {refuted} refuted",
                                f"rerun with nextra > {cfg.nextra}"))
            return diag, [], aborts
        if unconfirmed:
            aborts.append(Abort(name, "step9-capped-with-unconfirmed-candidate",
                                f"{cap} ILP solutions, {unconfirmed} neither confirmed nor "
                                f"refuted", f"rerun with nextra > {cfg.nextra}"))
            return diag, [], aborts
        cap *= 2
    else:
        aborts.append(Abort(name, "step9-cap-exhausted",
                            f"still capped at {cap // 2} after {cfg.max_cap_doublings} doublings",
                            f"rerun with cap > {cap // 2}"))
        return diag, [], aborts
    if not cfg.skip_cusp_test:
        for rec in records:
            if isinstance(rec.confirmation, Confirmed):
                v = cusp_check(rec)
                rec.cusp = v
                if v.deferred:
                    rec.extra["cusp_deferred_nextra"] = max(0, (v.required_q or 0) - N // 4)
    return diag, records, aborts


def _select_blocks(cfg: SearchConfig) -> list[ThetaBlock]:
    if cfg.blocks is not None:
        blocks = [tb_invariants(b) for b in cfg.blocks]
        for b in blocks:
            if (b.weight, b.index, int(b.A)) != (cfg.k, cfg.c * cfg.N, cfg.c + cfg.t):
                raise ValueError(f"block {b} is not of weight {cfg.k}, index {cfg.c * cfg.N}, "
                                 f"q-order {cfg.c + cfg.t}")
        return blocks
    A = cfg.c + cfg.t
    if 12 * A - cfg.k < 0:
        return []
    return tb_enumerate(cfg.k, cfg.c * cfg.N, A, allow_denominator=cfg.include_denominator)


def run_search(cfg: SearchConfig, provider: BasisProvider | None = None) -> SearchOutcome:
    """Steps 0-10 for every candidate leading theta block (see module doc)."""
    provider = provider or BasisProvider(cfg.basis_sources, cfg.generator_max_index)
    out = SearchOutcome(cfg)
    blocks = _select_blocks(cfg)
    out.blocks = [str(b) for b in blocks]
    log.info("k=%d N=%d (c,t)=(%d,%d): %d theta blocks", cfg.k, cfg.N, cfg.c, cfg.t,
             len(blocks))
    if not blocks:
        return out
    r1, gs = _step12(cfg, provider)
    out.step1_rank, out.step2_rank = r1, len(gs)
    log.info("basis rank %d, %d after zeroing the first %d coefficients", r1, len(gs),
             cfg.c + cfg.delta - 1)
    sh = _Shared(cfg, gs, _Confirmer(cfg, provider))

    def work(phi):
        log.info("block %s", phi)
        return _process_block(sh, phi)

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as ex:
            results = list(ex.map(work, blocks))
    else:
        results = [work(phi) for phi in blocks]
    for diag, recs, aborts in results:
        out.diagnostics.append(diag)
        out.records += recs
        out.aborts += aborts
    out.diagnostics.sort(key=lambda d: d.block)
    out.records.sort(key=lambda r: (str(r.theta_block), r.psi.singular_vector))
    out.aborts.sort(key=lambda a: (a.block or "", a.step))
    return out


def default_basis_sources(basis_dir=None) -> tuple:
    """``("generators", <dir>)`` with the directory from the argument or environment."""
    d = basis_dir or os.environ.get(BASIS_DIR_ENV)
    return ("generators",) + ((str(d),) if d else ())
