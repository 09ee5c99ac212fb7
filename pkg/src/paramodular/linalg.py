"""Exact integer and rational linear algebra.

Matrices are lists of rows (or 2-D numpy object arrays) of Python integers;
rational inputs are accepted where noted and handled with :class:`Fraction`.
Nothing here uses floating point.  Pivot searches run modulo a word-size
prime first and every modular answer is certified over the integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

import numpy as np

__all__ = [
    "hnf", "hnf_rows", "diagonalize", "saturate", "rank", "rank_mod_p",
    "left_kernel", "independent_rows", "membership", "NotInSpan",
    "DependentVectors", "is_unimodular", "det", "integerize",
]

_PRIMES = (2147483647, 2147483629, 2147483587, 2147483579, 2147483563,
           2147483549, 2147483543, 2147483497, 2147483489, 2147483477)


class DependentVectors(ValueError):
    """Raised when vectors required to be independent are not."""

    def __init__(self, message: str, relation=None):
        super().__init__(message)
        self.relation = relation


@dataclass(frozen=True)
class NotInSpan:
    """Certified non-membership: ``rank`` grows when the target is appended."""

    rank_basis: int
    rank_with_target: int

    def __bool__(self):
        return False


def _obj(M) -> np.ndarray:
    if isinstance(M, np.ndarray) and M.dtype == object and M.ndim == 2:
        return M.copy()
    rows = [list(r) for r in M]
    if not rows:
        return np.zeros((0, 0), dtype=object)
    out = np.empty((len(rows), len(rows[0])), dtype=object)
    for i, r in enumerate(rows):
        if len(r) != out.shape[1]:
            raise ValueError("ragged matrix")
        out[i, :] = [int(x) for x in r]
    return out


def _tolist(M: np.ndarray) -> list[list[int]]:
    return [[int(x) for x in row] for row in M]


def integerize(vec) -> tuple[list[int], int]:
    """Scale a rational vector to integers; returns (integer vector, denominator)."""
    den = 1
    for x in vec:
        x = Fraction(x)
        den = lcm(den, x.denominator)
    return [int(Fraction(x) * den) for x in vec], den


def _primitive(row: np.ndarray) -> np.ndarray:
    nz = row[row != 0]
    if nz.size == 0:
        return row
    g = int(np.gcd.reduce(nz))
    if g < 0:
        g = -g
    first = nz[0]
    if first < 0:
        g = -g
    return row // g if g != 1 else row


# ---------------------------------------------------------------------------
# modular pivots
# ---------------------------------------------------------------------------


def _mod_matrix(M: np.ndarray, p: int) -> np.ndarray:
    if M.size == 0:
        return np.zeros(M.shape, dtype=np.int64)
    return np.array([[int(x) % p for x in row] for row in M], dtype=np.int64).reshape(M.shape)


def _echelon_mod_p(A: np.ndarray, p: int):
    """Row echelon mod p. Returns (pivot columns, original row index of each pivot)."""
    A = A.copy()
    nr, nc = A.shape
    rows = list(range(nr))
    piv_cols, piv_rows = [], []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        col = A[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
            rows[r], rows[i] = rows[i], rows[r]
        inv = pow(int(A[r, c]), p - 2, p)
        A[r] = (A[r] * inv) % p
        below = A[r + 1:, c].copy()
        nzb = np.nonzero(below)[0]
        if nzb.size:
            idx = r + 1 + nzb
            A[idx] = (A[idx] - (below[nzb, None] * A[r][None, :]) % p) % p
        piv_cols.append(c)
        piv_rows.append(rows[r])
        r += 1
    return piv_cols, piv_rows


def rank_mod_p(M, p: int = _PRIMES[0]) -> int:
    M = _obj(M)
    if M.size == 0:
        return 0
    return len(_echelon_mod_p(_mod_matrix(M, p), p)[0])


# ---------------------------------------------------------------------------
# fraction-free elimination
# ---------------------------------------------------------------------------


def _ff_echelon(M: np.ndarray, aug: np.ndarray | None = None, order=None):
    """Integer row echelon with content removal, carrying an augmented block.

    Rows are reduced in place against pivots; returns (E, Aug, pivots) where
    ``pivots`` lists (row, column) and rows without pivots are zero in E.
    ``order`` optionally gives the column visiting order.
    """
    E = M.copy()
    nr, nc = E.shape
    Aug = aug.copy() if aug is not None else None
    cols = range(nc) if order is None else order
    pivots = []
    free = list(range(nr))
    for c in cols:
        cand = [i for i in free if E[i, c] != 0]
        if not cand:
            continue
        i = min(cand, key=lambda j: abs(E[j, c]))
        free.remove(i)
        pv = E[i, c]
        others = [j for j in range(nr) if j != i and E[j, c] != 0]
        if others:
            idx = np.array(others)
            f = E[idx, c].copy()
            E[idx] = E[idx] * pv - f[:, None] * E[i][None, :]
            if Aug is not None:
                Aug[idx] = Aug[idx] * pv - f[:, None] * Aug[i][None, :]
            for j in others:
                if Aug is not None:
                    both = np.concatenate([E[j], Aug[j]])
                    nz = both[both != 0]
                    g = int(np.gcd.reduce(nz)) if nz.size else 1
                    g = abs(g)
                    if g > 1:
                        E[j] //= g
                        Aug[j] //= g
                else:
                    nz = E[j][E[j] != 0]
                    g = abs(int(np.gcd.reduce(nz))) if nz.size else 1
                    if g > 1:
                        E[j] //= g
        pivots.append((i, c))
    return E, Aug, pivots


def rank(M) -> int:
    """Exact rank over Q (modular pivots certified by an exact elimination)."""
    M = _obj(M)
    if M.size == 0:
        return 0
    return len(independent_rows(M))


def independent_rows(M) -> list[int]:
    """Indices of a maximal linearly independent subset of rows, greedy in order."""
    M = _obj(M)
    if M.size == 0:
        return []
    nr = M.shape[0]
    for p in _PRIMES[:3]:
        # greedy: row i is kept if it raises the rank of the kept rows
        keep = []
        basis = np.zeros((0, M.shape[1]), dtype=np.int64)
        Mp = _mod_matrix(M, p)
        pivots: list[int] = []
        for i in range(nr):
            v = Mp[i].copy()
            for (c, b) in zip(pivots, basis):
                if v[c]:
                    v = (v - (int(v[c]) * b) % p) % p
            nz = np.nonzero(v)[0]
            if nz.size:
                c = int(nz[0])
                v = (v * pow(int(v[c]), p - 2, p)) % p
                # keep basis fully reduced on pivot columns
                for j, b in enumerate(basis):
                    if b[c]:
                        basis[j] = (b - (int(b[c]) * v) % p) % p
                basis = np.vstack([basis, v[None, :]])
                pivots.append(c)
                keep.append(i)
        # rank mod p <= rank over Q; certify independence exactly
        if _exact_rank(M[keep]) == len(keep) and _exact_rank(M) == len(keep):
            return keep
    # fall back to an exact greedy pass
    keep = []
    for i in range(nr):
        if _exact_rank(M[keep + [i]]) == len(keep) + 1:
            keep.append(i)
    return keep


def _exact_rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    _, _, piv = _ff_echelon(M)
    return len(piv)


def left_kernel(M) -> list[list[int]]:
    """Primitive integer vectors spanning ``{x : x M = 0}`` over Q."""
    M = _obj(M)
    nr = M.shape[0]
    if nr == 0:
        return []
    if M.shape[1] == 0:
        return [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
    aug = np.zeros((nr, nr), dtype=object)
    for i in range(nr):
        aug[i, i] = 1
    E, Aug, piv = _ff_echelon(M, aug)
    prow = {i for i, _ in piv}
    out = []
    for i in range(nr):
        if i not in prow:
            out.append([int(x) for x in _primitive(Aug[i])])
    return out


def det(M) -> int:
    """Exact determinant of a square integer matrix (Bareiss)."""
    A = [list(map(int, r)) for r in M]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Hermite normal form
# ---------------------------------------------------------------------------


def _xgcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hnf(M, with_transform: bool = True):
    """Row-style Hermite normal form.

    Returns ``(H, U)`` with ``H = U M``, ``U`` unimodular, pivots positive
    and entries above each pivot reduced into ``[0, pivot)``; zero rows sit
    at the bottom.  With ``with_transform=False`` ``U`` is None.
    """
    H = [list(map(int, r)) for r in M]
    nr = len(H)
    nc = len(H[0]) if nr else 0
    U = [[int(i == j) for j in range(nr)] for i in range(nr)] if with_transform else None
    r = 0
    for c in range(nc):
        if r == nr:
            break
        # combine rows r.. so that only row r is nonzero in column c
        for i in range(r + 1, nr):
            if H[i][c] == 0:
                continue
            a, b = H[r][c], H[i][c]
            if a == 0:
                H[r], H[i] = H[i], H[r]
                if U is not None:
                    U[r], U[i] = U[i], U[r]
                continue
            g, x, y = _xgcd(a, b)
            ag, bg = a // g, b // g
            rr = [x * u + y * v for u, v in zip(H[r], H[i])]
            ri = [ag * v - bg * u for u, v in zip(H[r], H[i])]
            H[r], H[i] = rr, ri
            if U is not None:
                ur = [x * u + y * v for u, v in zip(U[r], U[i])]
                ui = [ag * v - bg * u for u, v in zip(U[r], U[i])]
                U[r], U[i] = ur, ui
        if H[r][c] == 0:
            continue
        if H[r][c] < 0:
            H[r] = [-v for v in H[r]]
            if U is not None:
                U[r] = [-v for v in U[r]]
        p = H[r][c]
        for i in range(r):
            q = H[i][c] // p
            if q:
                H[i] = [u - q * v for u, v in zip(H[i], H[r])]
                if U is not None:
                    U[i] = [u - q * v for u, v in zip(U[i], U[r])]
        r += 1
    return H, U


def hnf_rows(M) -> list[list[int]]:
    """Nonzero rows of the Hermite normal form (a basis of the row lattice)."""
    H, _ = hnf(M, with_transform=False)
    return [row for row in H if any(row)]


def _transpose(M):
    return [list(r) for r in zip(*M)] if M else []


def _matmul(A, B):
    Bt = _transpose(B)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def is_unimodular(U) -> bool:
    if not U:
        return True
    return len(U) == len(U[0]) and abs(det(U)) == 1


def diagonalize(M):
    """Unimodular ``A``, ``B`` with ``A M B`` diagonal, by alternating HNF and transposes.

    Returns ``(A, D, B)``.  The diagonal is not normalized to Smith form.
    """
    D = [list(map(int, r)) for r in M]
    nr = len(D)
    nc = len(D[0]) if nr else 0
    A = _identity(nr)
    B = _identity(nc)
    for _ in range(64 + 4 * (nr + nc)):
        H, U = hnf(D)
        A = _matmul(U, A)
        D = H
        if _is_diag(D):
            break
        Ht, V = hnf(_transpose(D))
        B = _matmul(B, _transpose(V))
        D = _transpose(Ht)
        if _is_diag(D):
            break
    else:  # pragma: no cover - the iteration strictly decreases pivots
        raise RuntimeError("diagonalization did not converge")
    return A, D, B


def _is_diag(D) -> bool:
    return all(v == 0 for i, row in enumerate(D) for j, v in enumerate(row) if i != j)


def _inverse_unimodular(B):
    """Exact inverse of a unimodular integer matrix."""
    n = len(B)
    aug = [list(map(int, row)) + [int(i == j) for j in range(n)] for i, row in enumerate(B)]
    H, _ = hnf(aug, with_transform=False)
    # H = [I | B^-1] because B is unimodular
    for i in range(n):
        if H[i][i] != 1 or any(H[i][j] for j in range(n) if j != i):
            raise ValueError("matrix is not unimodular")
    return [row[n:] for row in H]


# ---------------------------------------------------------------------------
# saturation
# ---------------------------------------------------------------------------


def saturate(vectors: Sequence[Sequence[int]], method: str = "lattice") -> list[list[int]]:
    """Integral basis of ``span_Q(vectors) ∩ Z^n`` for independent integer vectors.

    ``method="diagonalize"`` follows the textbook recipe: find unimodular
    ``A, B`` with ``A M B`` diagonal and return the first ``d`` rows of
    ``B^-1``.  ``method="lattice"`` (default, cheaper for long vectors)
    computes a basis ``L`` of the column lattice ``M Z^n`` of the d x n
    matrix M and returns the rows of ``L^-1 M``; those rows are integral and
    their columns generate ``Z^d``, which is the saturation criterion.
    """
    vecs = [list(map(int, v)) for v in vectors]
    if not vecs:
        return []
    d = len(vecs)
    M = _obj(vecs)
    rel = left_kernel(M)
    if rel:
        raise DependentVectors("saturate needs independent vectors", relation=rel[0])
    if method == "diagonalize":
        _, _, B = diagonalize(vecs)
        Binv = _inverse_unimodular(B)
        return [list(r) for r in Binv[:d]]
    if method != "lattice":
        raise ValueError(method)
    cols = hnf_rows(_transpose(vecs))  # rows of this HNF form a basis of the column lattice
    L = _transpose(cols)  # d x d, columns generate M Z^n
    return _solve_left_int(L, vecs)


def _solve_left_int(L, vecs):
    """Return W with L W = M for square nonsingular L (W is known to be integral)."""
    d = len(L)
    # Gauss-Jordan over Q on [L | M]
    rows = [[Fraction(x) for x in L[i]] + [Fraction(x) for x in vecs[i]] for i in range(d)]
    for c in range(d):
        p = next(i for i in range(c, d) if rows[i][c] != 0)
        rows[c], rows[p] = rows[p], rows[c]
        pv = rows[c][c]
        rows[c] = [x / pv for x in rows[c]]
        for i in range(d):
            if i != c and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    out = []
    for i in range(d):
        w = rows[i][d:]
        if any(x.denominator != 1 for x in w):  # pragma: no cover - guarded by theory
            raise ArithmeticError("saturation produced a non-integral row")
        out.append([int(x) for x in w])
    return out


# ---------------------------------------------------------------------------
# span membership
# ---------------------------------------------------------------------------


def membership(target, basis):
    """Exact rational coefficients ``x`` with ``sum x_i basis_i = target``.

    Returns a list of Fractions, or :class:`NotInSpan`.  A dependent basis is
    allowed; coefficients of the dropped dependent vectors are zero.
    """
    basis = [list(b) for b in basis]
    n = len(target)
    if not basis:
        if all(Fraction(t) == 0 for t in target):
            return []
        return NotInSpan(0, 1)
    den = 1
    for v in basis + [list(target)]:
        for x in v:
            den = lcm(den, Fraction(x).denominator)
    B = _obj([[int(Fraction(x) * den) for x in v] for v in basis])
    t = np.array([int(Fraction(x) * den) for x in target], dtype=object)
    keep = independent_rows(B)
    Bk = B[keep]
    r = len(keep)
    aug = np.vstack([Bk, t[None, :]])
    # eliminate: the relation with nonzero last coordinate gives the combination
    kern = left_kernel(aug)
    rel = [v for v in kern if v[-1] != 0]
    if not rel:
        return NotInSpan(r, r + 1)
    v = rel[0]
    s = -v[-1]
    coeffs = [Fraction(0)] * len(basis)
    for j, i in enumerate(keep):
        coeffs[i] = Fraction(v[j], s)
    # certify
    for c in range(n):
        acc = sum(coeffs[i] * B[i, c] for i in keep)
        if acc != t[c]:  # pragma: no cover - exact elimination cannot fail
            raise ArithmeticError("membership certificate failed")
    return coeffs
