"""All integer points of a polyhedron ``{x : M x + b >= 0}``, up to a cap.

Bounds come from an exact rational simplex run on the LP dual
``min h.y  s.t.  A^T y = c, y >= 0`` (``A = -M``, ``h = b``), which has only
``d`` equality rows.  The search fixes coordinates in order and asks the LP
for the range of the next one, so points come out in lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor, lcm
from typing import Sequence

from .linalg import left_kernel

__all__ = ["IlpProblem", "Complete", "Capped", "Unbounded", "ilp_enumerate", "lp_max",
           "brute_force_box"]


@dataclass(frozen=True)
class IlpProblem:
    M: tuple
    b: tuple
    cap: int = 10_000
    d: int | None = None

    def __post_init__(self):
        M = tuple(tuple(int(v) for v in row) for row in self.M)
        b = tuple(int(v) for v in self.b)
        if len(M) != len(b):
            raise ValueError(f"M has {len(M)} rows but b has {len(b)} entries")
        d = self.d
        if d is None:
            if not M:
                raise ValueError("d must be given when M has no rows")
            d = len(M[0])
        if any(len(row) != d for row in M):
            raise ValueError("ragged constraint matrix")
        if self.cap < 1:
            raise ValueError("cap must be positive")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def satisfied(self, x: Sequence[int]) -> bool:
        return all(sum(a * v for a, v in zip(row, x)) + bi >= 0
                   for row, bi in zip(self.M, self.b))


@dataclass(frozen=True)
class Complete:
    solutions: list

    status = "complete"


@dataclass(frozen=True)
class Capped:
    solutions: list
    cap: int

    status = "capped"


@dataclass(frozen=True)
class Unbounded:
    direction: tuple
    solutions: list = field(default_factory=list)

    status = "unbounded"


# ---------------------------------------------------------------------------
# exact LP
# ---------------------------------------------------------------------------


def _pivot(T, r, c):
    piv = T[r][c]
    row = [v / piv for v in T[r]]
    T[r] = row
    for i, other in enumerate(T):
        if i != r:
            f = other[c]
            if f:
                T[i] = [a - f * b for a, b in zip(other, row)]


def _simplex(T, basis, cols):
    """Minimize the last row of tableau T (Bland's rule) over columns ``cols``.

    Returns True for an optimum and False for an unbounded objective.
    """
    m = len(T) - 1
    while True:
        obj = T[-1]
        enter = next((j for j in cols if obj[j] < 0), None)
        if enter is None:
            return True
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        _pivot(T, best[1], enter)
        basis[best[1]] = enter


def lp_max(c: Sequence, A: Sequence[Sequence], h: Sequence):
    """Maximize ``c.x`` over ``A x <= h`` exactly.

    Returns ``("optimal", value, x)``, ``("unbounded", None, None)`` or
    ``("infeasible", None, None)``.  ``A`` must have full column rank when
    the result is optimal and ``x`` is wanted.
    """
    d = len(c)
    R = len(A)
    c = [Fraction(v) for v in c]
    if d == 0:
        feas = all(Fraction(v) >= 0 for v in h)
        return ("optimal", Fraction(0), []) if feas else ("infeasible", None, None)
    # dual: min h.y  s.t.  sum_i y_i A[i][j] = c_j,  y >= 0
    status, val, basis, T = _dual_solve(c, A, h)
    if status == "optimal":
        x = _primal_from_basis(A, h, basis, R, d)
        return "optimal", val, x
    if status == "dual-unbounded":
        return "infeasible", None, None
    # dual infeasible: primal infeasible or unbounded
    st0, _, _, _ = _dual_solve([Fraction(0)] * d, A, h)
    if st0 == "dual-unbounded":
        return "infeasible", None, None
    return "unbounded", None, None


def _dual_solve(c, A, h):
    d, R = len(c), len(A)
    ncol = R + d
    T = []
    for j in range(d):
        sgn = -1 if c[j] < 0 else 1
        row = [Fraction(sgn * A[i][j]) for i in range(R)]
        row += [Fraction(1 if k == j else 0) for k in range(d)]
        row.append(Fraction(sgn) * c[j])
        T.append(row)
    # phase 1: minimize the sum of artificials
    obj = [Fraction(0)] * (ncol + 1)
    for row in T:
        for k in range(R):
            obj[k] -= row[k]
        obj[-1] -= row[-1]
    T.append(obj)
    basis = [R + j for j in range(d)]
    _simplex(T, basis, range(R))
    if T[-1][-1] != 0:
        return "dual-infeasible", None, basis, T
    # drive zero-level artificials out of the basis
    for i in range(d):
        if basis[i] >= R:
            for k in range(R):
                if T[i][k] != 0:
                    _pivot(T, i, k)
                    basis[i] = k
                    break
    # phase 2
    obj = [Fraction(0)] * (ncol + 1)
    for k in range(R):
        obj[k] = Fraction(h[k])
    for i, bcol in enumerate(basis):
        if bcol < R and obj[bcol]:
            f = obj[bcol]
            obj = [a - f * b for a, b in zip(obj, T[i])]
    T[-1] = obj
    if not _simplex(T, basis, range(R)):
        return "dual-unbounded", None, basis, T
    return "optimal", -T[-1][-1], basis, T


def _primal_from_basis(A, h, basis, R, d):
    rows = [b for b in basis if b < R]
    if len(rows) < d:
        return None
    # complementary slackness: A_B x = h_B
    aug = [[Fraction(A[i][j]) for j in range(d)] + [Fraction(h[i])] for i in rows]
    for col in range(d):
        piv = next(r for r in range(col, d) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(d):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[j][-1] for j in range(d)]


# ---------------------------------------------------------------------------
# recession directions
# ---------------------------------------------------------------------------


def _integral(v):
    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    return tuple(int(Fraction(x) * den) for x in v)


def _recession_direction(M, d):
    """A nonzero integer x with M x >= 0, or None if the cone is {0}."""
    if d == 0:
        return None
    if not M:
        return tuple(1 if j == 0 else 0 for j in range(d))
    # lineality space: integer kernel of M
    ker = left_kernel([list(col) for col in zip(*M)])
    if ker:
        return tuple(int(v) for v in ker[0])
    # pointed cone: any nonzero ray has 1^T M x > 0
    w = [sum(row[j] for row in M) for j in range(d)]
    A = [[-v for v in row] for row in M] + [w, [-v for v in w]]
    h = [0] * len(M) + [1, -1]
    st, _, x = lp_max([0] * d, A, h)
    if st != "optimal":
        return None
    return _integral(x)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def _reduce(M, b, prefix):
    """Constraints on the coordinates after ``prefix`` with the prefix substituted."""
    j = len(prefix)
    rows, rhs = [], []
    for row, bi in zip(M, b):
        const = bi + sum(a * v for a, v in zip(row, prefix))
        rest = row[j:]
        if any(rest):
            rows.append(rest)
            rhs.append(const)
        elif const < 0:
            return None
    return rows, rhs


def _range_first(rows, rhs, d_rest):
    """Exact [lo, hi] of the first remaining coordinate, or None if infeasible."""
    if d_rest == 1:
        lo, hi = None, None
        for row, c in zip(rows, rhs):
            a = row[0]
            if a > 0:
                v = ceil(Fraction(-c, a))
                lo = v if lo is None else max(lo, v)
            else:
                v = floor(Fraction(c, -a))
                hi = v if hi is None else min(hi, v)
        if lo is None or hi is None:
            raise _Unbounded()
        return (lo, hi) if lo <= hi else None
    A = [[-v for v in row] for row in rows]
    e = [1] + [0] * (d_rest - 1)
    st, hi, _ = lp_max(e, A, rhs)
    if st == "infeasible":
        return None
    if st == "unbounded":
        raise _Unbounded()
    st, lo, _ = lp_max([-1] + [0] * (d_rest - 1), A, rhs)
    if st == "unbounded":
        raise _Unbounded()
    return ceil(-lo), floor(hi)


class _Unbounded(Exception):
    pass


def ilp_enumerate(p: IlpProblem):
    """All integer x with ``M x + b >= 0`` in lexicographic order (see module doc)."""
    M, b, d, cap = p.M, p.b, p.d, p.cap
    if d == 0:
        return Complete([()]) if all(v >= 0 for v in b) else Complete([])
    # feasibility of the LP relaxation first
    A = [[-v for v in row] for row in M]
    st, _, _ = lp_max([0] * d, A, list(b))
    if st == "infeasible":
        return Complete([])
    ray = _recession_direction(M, d)
    if ray is not None:
        return Unbounded(ray)
    sols: list = []
    capped = False

    def rec(prefix):
        nonlocal capped
        red = _reduce(M, b, prefix)
        if red is None:
            return
        rows, rhs = red
        rest = d - len(prefix)
        if rest == 0:
            sols.append(tuple(prefix))
            if len(sols) >= cap:
                capped = True
            return
        if not rows:
            raise _Unbounded()
        rng = _range_first(rows, rhs, rest)
        if rng is None:
            return
        lo, hi = rng
        for v in range(lo, hi + 1):
            rec(prefix + [v])
            if capped:
                return

    try:
        rec([])
    except _Unbounded:  # pragma: no cover - excluded by the recession check
        raise AssertionError("bounded polyhedron reported an unbounded slice")
    for x in sols:
        assert p.satisfied(x)
    if capped:
        return Capped(sols, cap)
    return Complete(sols)


def brute_force_box(p: IlpProblem, radius: int) -> list:
    """Every solution with all coordinates in [-radius, radius] (test oracle)."""
    from itertools import product

    return [x for x in product(range(-radius, radius + 1), repeat=p.d) if p.satisfied(x)]
