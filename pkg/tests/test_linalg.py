from fractions import Fraction
from itertools import product

import pytest
from hypothesis import assume, given, settings, strategies as st

from paramodular.linalg import (DependentVectors, NotInSpan, det, diagonalize, hnf, hnf_rows,
                                independent_rows, integerize, is_unimodular, left_kernel,
                                membership, rank, rank_mod_p, saturate)


def matrices(rows=(1, 5), cols=(1, 5), lo=-9, hi=9):
    return st.integers(*rows).flatmap(
        lambda r: st.integers(*cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c),
                               min_size=r, max_size=r)))


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def frac_rank(M):
    rows = [[Fraction(x) for x in r] for r in M]
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


@given(matrices())
def test_hnf_shape_and_transform(M):
    H, U = hnf(M)
    assert matmul(U, M) == H
    assert is_unimodular(U)
    pivots = []
    for row in H:
        nz = [j for j, v in enumerate(row) if v]
        if not nz:
            continue
        pivots.append(nz[0])
        assert row[nz[0]] > 0
    assert pivots == sorted(pivots) and len(set(pivots)) == len(pivots)
    for i, pc in enumerate(pivots):
        for k in range(i):
            assert 0 <= H[k][pc] < H[i][pc]
    assert len(hnf_rows(M)) == frac_rank(M)


@given(matrices())
def test_rank_and_kernel(M):
    assert rank(M) == frac_rank(M)
    # reduction mod a large prime can only lose rank, and not for entries this small
    assert rank_mod_p(M) == frac_rank(M)
    K = left_kernel(M)
    assert len(K) == len(M) - frac_rank(M)
    for v in K:
        assert all(sum(v[i] * M[i][j] for i in range(len(M))) == 0 for j in range(len(M[0])))
    keep = independent_rows(M)
    assert len(keep) == frac_rank(M) == frac_rank([M[i] for i in keep])


@given(matrices(rows=(1, 4), cols=(1, 4)))
def test_membership_certificate(M):
    target = [sum((i + 1) * M[i][j] for i in range(len(M))) for j in range(len(M[0]))]
    x = membership(target, M)
    assert not isinstance(x, NotInSpan)
    assert [sum(x[i] * M[i][j] for i in range(len(M))) for j in range(len(M[0]))] == target
    if frac_rank(M) < len(M[0]):
        # a vector outside the row space
        K = left_kernel([list(col) for col in zip(*M)])
        assume(K)
        assert isinstance(membership(K[0], M), NotInSpan)


@given(matrices(rows=(1, 4), cols=(1, 4)))
def test_det_matches_rank(M):
    n = min(len(M), len(M[0]))
    S = [row[:n] for row in M[:n]]
    assert (det(S) != 0) == (frac_rank(S) == n)


def _right_kernel(vecs):
    return left_kernel([list(c) for c in zip(*vecs)])


@st.composite
def independent_vectors(draw):
    n = draw(st.integers(1, 4))
    d = draw(st.integers(1, n))
    vecs = [draw(st.lists(st.integers(-6, 6), min_size=n, max_size=n)) for _ in range(d)]
    assume(frac_rank(vecs) == d)
    return vecs


@settings(max_examples=60, deadline=None)
@given(independent_vectors(), st.sampled_from(["lattice", "diagonalize"]))
def test_saturation_against_lattice_points(vecs, method):
    S = saturate(vecs, method=method)
    n = len(vecs[0])
    assert len(S) == len(vecs)
    C = _right_kernel(vecs)
    # S spans the same rational space and is integral
    assert frac_rank(S + vecs) == len(vecs)
    # every integer point of the space in a box is an integer combination of S
    R = 3 if n <= 3 else 2
    for x in product(range(-R, R + 1), repeat=n):
        if any(sum(c * xi for c, xi in zip(row, x)) for row in C):
            continue
        coef = membership(list(x), S)
        assert not isinstance(coef, NotInSpan)
        assert all(Fraction(v).denominator == 1 for v in coef)


@settings(max_examples=40, deadline=None)
@given(independent_vectors())
def test_saturation_routes_agree(vecs):
    assert hnf_rows(saturate(vecs, "lattice")) == hnf_rows(saturate(vecs, "diagonalize"))


def test_saturation_known_case():
    # span of (2, 0), (0, 3) in Z^2 saturates to Z^2
    assert hnf_rows(saturate([[2, 0], [0, 3]])) == [[1, 0], [0, 1]]
    # (2, 4, 6) saturates to (1, 2, 3)
    assert saturate([[2, 4, 6]]) in ([[1, 2, 3]], [[-1, -2, -3]])
    with pytest.raises(DependentVectors):
        saturate([[1, 2], [2, 4]])


@given(matrices(rows=(1, 4), cols=(1, 4)))
def test_diagonalize(M):
    A, D, B = diagonalize(M)
    assert matmul(matmul(A, M), B) == D
    assert is_unimodular(A) and is_unimodular(B)
    assert all(D[i][j] == 0 for i in range(len(D)) for j in range(len(D[0])) if i != j)


def test_integerize():
    vec, den = integerize([Fraction(1, 2), Fraction(-1, 3), 2])
    assert den == 6 and vec == [3, -2, 12]
