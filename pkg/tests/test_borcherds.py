from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, strategies as st

from paramodular.arith import jordan2
from paramodular.borcherds import (BorcherdsRecord, FJOracle, PsiCandidate, classify,
                                   cusp_divisor_data, cusp_test, humbert_support,
                                   involution_scan, leading_monomial, singular_keys, bp_expand)
from paramodular.jacobi import (InsufficientPrecision, JacobiTrunc, grit_lift,
                                jacobi_from_theta_block, weak_generators)
from paramodular.series import LaurentPoly, QSeriesTrunc


@pytest.fixture(scope="module")
def igusa():
    """Borcherds product of 2 phi_{0,1}; its theta block is phi_{10,1}."""
    psi = PsiCandidate.from_series(1, weak_generators(12)["phi_0_1"].series.scale(2))
    return BorcherdsRecord.build("0^20 1^2", psi, 1, 0)


def test_igusa_classification(igusa):
    assert classify(igusa.psi) == (10, 0, 1, 1)
    assert (igusa.psi.A, igusa.psi.B) == (1, 1)
    assert igusa.psi.singular_vector == (2, 20)
    assert igusa.humbert == [((0, 1), 2)] and igusa.humbert_nonnegative


def test_igusa_product_equals_additive_lift(igusa):
    # the product is also the additive lift of phi_{10,1}: FJ coefficient j is phi | V_j
    fj = bp_expand(igusa, 3, 5)
    lift = grit_lift(jacobi_from_theta_block("0^20 1^2", 20), 4, 5)
    for a, b in zip(fj, lift):
        assert a.m == b.m and a.series.equal_through(b.series, 5)
    assert leading_monomial(fj, 1) == (1, 1, 1, 1)


def test_expansion_routes_agree(igusa):
    fa = bp_expand(igusa, 3, 5, route="exp")
    fb = bp_expand(igusa, 3, 5, route="product")
    assert all(a.series.equal_through(b.series) for a, b in zip(fa, fb))
    with pytest.raises(ValueError):
        bp_expand(igusa, 1, 3, route="sum")


def test_expansion_reports_needed_depth(igusa):
    short = BorcherdsRecord.build("0^20 1^2", PsiCandidate.from_series(
        1, weak_generators(2)["phi_0_1"].series.scale(2)), 1, 0)
    with pytest.raises(InsufficientPrecision) as exc:
        bp_expand(short, 4, 6)
    assert exc.value.required > 2


def test_igusa_is_symmetric_cusp_form(igusa):
    fj = bp_expand(igusa, 3, 5)
    assert involution_scan(fj, 1, 1, 1) == []
    assert bool(cusp_test(FJOracle(fj, 1, 1, 1), 10, 1, 1))


def test_involution_scan_flags_perturbation(igusa):
    fj = bp_expand(igusa, 3, 5)
    bumped = fj[1].series + QSeriesTrunc(3, [LaurentPoly({0: 1})], 2)
    fj2 = [fj[0], JacobiTrunc(fj[1].k, fj[1].m, bumped, "weak")] + fj[2:]
    assert (3, 0, 2) in involution_scan(fj2, 1, 1, 1)
    # diagonal terms must vanish for the antisymmetric sign
    assert any(n == j for n, _, j in involution_scan(fj, 1, 1, -1))


def test_fj_oracle_swaps_and_reports_missing(igusa):
    fj = bp_expand(igusa, 1, 4)
    o = FJOracle(fj, 1, 1, 1)
    assert o(2, 1, 1) == o.raw(2, 1, 1)
    assert o(1, 1, 2) == o.raw(2, 1, 1)
    assert o(3, 0, 0) == 0
    with pytest.raises(InsufficientPrecision) as exc:
        o.raw(5, 0, 3)
    assert exc.value.axis == "xi"
    v = cusp_test(lambda a, r, j: o.raw(a, r, j) if j <= 2 else o.raw(9, 0, 9), 10, 1, 1)
    assert v.is_cusp is True


@given(st.integers(1, 60), st.integers(-3, 0))
def test_singular_keys_are_nonpositive_discriminants(N, n_min):
    keys = singular_keys(N, n_min)
    brute = [(n, r) for n in range(n_min, N + 1) for r in range(-N, N)
             if 4 * n * N - r * r <= 0]
    assert keys == brute


def _cusp_oracle(k, N):
    out = []
    for m in (d for d in range(1, N + 1) if N % d == 0):
        ell = gcd(N // m, m)
        if k % 2 == 1 and ell in (1, 2):
            continue
        it = {1: Fraction(1), 2: Fraction(3)}.get(ell, Fraction(jordan2(ell), 2))
        out.append((m, ell, N // (m * ell), it, int(k * it // 12)))
    return out


@pytest.mark.parametrize("k,N", [(46, 4), (9, 16), (2, 249), (2, 277), (10, 1), (11, 36),
                                 (8, 72)])
def test_cusp_divisor_data_matches_oracle(k, N):
    assert cusp_divisor_data(k, N) == _cusp_oracle(k, N)


def test_cusp_divisor_data_known():
    assert cusp_divisor_data(46, 4) == [(1, 1, 4, 1, 3), (2, 2, 1, 3, 11), (4, 1, 1, 1, 3)]
    assert cusp_divisor_data(9, 16) == [(4, 4, 1, 6, 4)]


def test_candidate_validation():
    g = weak_generators(3)["phi_0_1"].series
    with pytest.raises(ValueError):
        # singular coefficients 1/2 and 5 are not all integral
        PsiCandidate.from_series(1, g.scale(Fraction(1, 2)))
    with pytest.raises(ValueError):
        # c(0, 0) = 5 is odd
        classify(PsiCandidate.from_series(1, g.scale(Fraction(1, 2)), check=False))
    with pytest.raises(ValueError):
        # A = 10/24 + 2/24 = 1/2
        PsiCandidate.from_series(1, g)
    assert classify(PsiCandidate.from_series(1, g, check=False))[0] == 5
    psi = PsiCandidate.from_series(1, g.scale(2))
    assert humbert_support(psi, 0, 0) == [((0, 1), 2)]
