from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from paramodular.arith import divisors
from paramodular.jacobi import (BasisTrunc, Confirmed, Inconclusive, InsufficientPrecision,
                                JacobiTrunc, Refuted, confirm_quotient_methods,
                                confirm_truncation, confirmation_index,
                                cusp_basis_from_generators, cyclotomic_factorization,
                                delta_power_basis, divisibility_bound, grit_lift,
                                inflation_quotient, inflations_from_leading,
                                jacobi_from_theta_block, provision_basis, read_basis_file,
                                v2_quotient, v_apply, weak_generators, write_basis_file)
from paramodular.series import LaurentPoly, QSeriesTrunc, cyclotomic
from paramodular.theta import tb_expand, tb_invariants


@st.composite
def jacobi_like(draw):
    """Arbitrary truncated series; the Hecke rule is formal in the coefficients."""
    k = draw(st.integers(-2, 12))
    m = draw(st.integers(1, 6))
    off = draw(st.integers(-1, 2))
    L = draw(st.integers(2, 10))
    rows = [LaurentPoly(draw(st.dictionaries(st.integers(-8, 8), st.integers(-9, 9),
                                             max_size=4))) for _ in range(L + 1)]
    return JacobiTrunc(k, m, QSeriesTrunc(off, rows, L))


def _v2_by_substitution(f: JacobiTrunc) -> dict:
    # 2^(k-1) [ 2^-k (f(tau/2, z) + f((tau+1)/2, z)) + f(2 tau, 2 z) ]
    out = {}
    for n, r, c in f.series.items():
        if n % 2 == 0:
            out[(n // 2, r)] = out.get((n // 2, r), 0) + c
    for n, r, c in f.series.q_dilate(2).map_zeta(2).items():
        out[(n, r)] = out.get((n, r), 0) + Fraction(2) ** (f.k - 1) * c
    return out


@settings(max_examples=80, deadline=None)
@given(jacobi_like())
def test_v2_matches_substitution(f):
    g = v_apply(f, 2)
    ref = _v2_by_substitution(f)
    top = g.prec
    assert top == f.prec // 2
    for n in range(g.offset, top + 1):
        for r in range(-20, 21):
            assert g.series.coeff(n, r) == ref.get((n, r), 0)
    # nothing below the output offset
    assert all(v == 0 for (n, _), v in ref.items() if n < g.offset)


@settings(max_examples=40, deadline=None)
@given(jacobi_like(), st.sampled_from([3, 4, 6]))
def test_v_ell_matches_divisor_sum(f, ell):
    g = v_apply(f, ell)
    for n in range(g.offset, g.prec + 1):
        for r in range(-30, 31):
            want = sum(Fraction(a) ** (f.k - 1) * f.series.coeff(n * ell // (a * a), r // a)
                       for a in divisors(ell) if n % a == 0 and r % a == 0)
            assert g.series.coeff(n, r) == want


def test_v_apply_precision_error():
    f = jacobi_from_theta_block("0^20 1^2", 6)
    with pytest.raises(InsufficientPrecision) as exc:
        v_apply(f, 2, q_order=5)
    assert exc.value.required == 10


def test_grit_lift_first_coefficient():
    f = jacobi_from_theta_block("0^20 1^2", 8)
    fj = grit_lift(f, 3, 2)
    assert [g.m for g in fj] == [1, 2, 3]
    assert fj[0].series.equal_through(f.series, 2)


def _dim_S(w):
    if w < 12 or w % 2:
        return 0
    dim_M = w // 12 + (0 if w % 12 == 2 else 1)
    return dim_M - 1


@pytest.mark.parametrize("k,m", [(10, 1), (12, 1), (16, 1), (22, 1), (10, 2), (12, 3),
                                 (12, 16), (24, 4), (46, 8)])
def test_generator_basis_dimension(k, m):
    # dim J^cusp_{k,m} = sum_{j=0}^{m} (dim S_{k+2j} - floor(j^2 / 4m)) for even k
    want = sum(_dim_S(k + 2 * j) - (j * j) // (4 * m) for j in range(m + 1))
    b = cusp_basis_from_generators(k, m, m // 4 + 3)
    assert b.rank == want
    for e in b.elements:
        assert e.check_cusp() and e.check_symmetry()


def test_weak_generators_known_terms():
    g = weak_generators(3)
    # phi_{-2,1} = (zeta - 2 + 1/zeta) + ..., phi_{0,1} = (zeta + 10 + 1/zeta) + ...
    assert g["phi_-2_1"].series.at(0) == LaurentPoly({-1: 1, 0: -2, 1: 1})
    assert g["phi_0_1"].series.at(0) == LaurentPoly({-1: 1, 0: 10, 1: 1})
    assert g["phi_0_1"].series.at(1) == LaurentPoly({-2: 10, -1: -64, 0: 108, 1: -64, 2: 10})
    for f in g.values():
        assert f.check_symmetry()


def test_theta_block_form_is_symmetric():
    f = jacobi_from_theta_block("0^4 1^2 2^2 3^2 4^1 5^1 14^1 17^1", 80)
    assert f.kind == "cusp" and f.check_cusp() and f.check_symmetry()
    n2, r2, s = f.reduce_index(3, 600)
    assert 0 <= r2 <= f.m and f.coeff_reduced(3, 600) == s * f.coeff(n2, r2)


def test_basis_file_round_trip(tmp_path):
    b = cusp_basis_from_generators(12, 2, 5)
    p = tmp_path / "J_12_2.txt"
    write_basis_file(b, p)
    back = read_basis_file(p)
    assert (back.k, back.m, back.q_order, back.rank) == (12, 2, 5, b.rank)
    for x, y in zip(b.elements, back.elements):
        assert x.series.equal_through(y.series, 5)
    assert provision_basis(12, 2, 4, [p]).rank == b.rank


@pytest.mark.parametrize("text", [
    "",
    "k=12 m=2\n",
    "k=12 m=2 qorder=3\nelement a\n1 0 1\n",
    "k=12 m=2 qorder=3\nelement a\n1 0 x\nend\n",
    "k=12 m=2 qorder=3\nelement a\n5 0 1\nend\n",
    "k=12 m=2 qorder=3\nelement a\n1 0 1\n1 0 2\nend\n",
    "k=12 m=2 qorder=3\nstray\n",
])
def test_basis_file_rejects_malformed(tmp_path, text):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(ValueError):
        read_basis_file(p)


def test_provision_rejects_short_file(tmp_path):
    p = tmp_path / "J.txt"
    write_basis_file(cusp_basis_from_generators(12, 2, 3), p)
    with pytest.raises(InsufficientPrecision):
        provision_basis(12, 2, 6, [p])


def test_divisibility_bound_small():
    # phi_{10,1}: nu(1) = 2, bound floor((10 + 2 - 1) / 12 * 1 * 1) = 0
    assert divisibility_bound("0^20 1^2") == 0
    # 0^92 2^2: nu(1) = nu(2) = 2; r = 2 gives floor(47 * 2 * 3 / 12) = 23
    assert divisibility_bound("0^92 2^2") == 23


def test_delta_power_basis_reconstructs():
    b = cusp_basis_from_generators(12, 1, 6)
    (q,) = delta_power_basis(1, b, 1, 4)
    # phi_{12,1} / Delta is phi_{0,1} up to scaling
    p01 = weak_generators(4)["phi_0_1"].series
    ratio = Fraction(q.coeff(0, 0), p01.coeff(0, 0))
    assert q.equal_through(p01.scale(ratio), 4)


def test_confirmation_of_weak_generator():
    p01 = weak_generators(6)["phi_0_1"].series.truncate_abs(3)
    assert confirmation_index(p01, 1) == 1
    res = confirm_truncation(p01, 1, lambda k, m, q: cusp_basis_from_generators(k, m, q),
                             assume_complete=True)
    assert isinstance(res, Confirmed) and res.i == 1
    bad = p01 + QSeriesTrunc(1, [LaurentPoly({0: 1})], 2)
    res = confirm_truncation(bad, 1, lambda k, m, q: cusp_basis_from_generators(k, m, q),
                             assume_complete=True)
    assert isinstance(res, Refuted)
    res = confirm_truncation(bad, 1, lambda k, m, q: cusp_basis_from_generators(k, m, q))
    assert isinstance(res, Inconclusive)


def test_v2_quotient_constant_term_is_germ():
    for text in ("0^4 1^2 2^2 3^2 4^1 5^1 14^1 17^1", "0^4 1^1 3^1 4^2 5^1 6^1 8^1 9^2 15^1"):
        w = v2_quotient(text, 10)
        assert w.series.offset == 0
        assert w.series.at(0) == tb_invariants(text).germ


def test_inflation_quotient_is_theta_quotient():
    Th = "0^4 1^2 2^2 3^2 4^2 5^2 6^2 7^1 8^2 9^1 10^1 11^1 12^1 13^1 14^1 18^1"
    ph = "0^4 1^3 2^2 3^2 4^2 5^2 6^3 7^2 8^1 9^1 10^1 11^1 12^1 13^1"
    w = inflation_quotient(Th, ph, 12)
    assert w.series.equal_through(tb_expand("8^1 18^1 14^1 1^-1 6^-1 7^-1", 12), 12)
    found = inflations_from_leading(ph, tb_invariants(ph).germ, 249)
    assert [str(t) for t in found] == [str(tb_invariants(Th))]
    res = confirm_quotient_methods(w.series, ph, [w])
    assert isinstance(res, Confirmed) and res.method == "inflation"


def test_cyclotomic_factorization():
    p = (cyclotomic(8) * cyclotomic(18) ** 2 * cyclotomic(3)).shift(-5)
    assert cyclotomic_factorization(p) == (1, -5, {8: 1, 18: 2, 3: 1})
    assert cyclotomic_factorization(-p)[0] == -1
    assert cyclotomic_factorization(LaurentPoly({0: 1, 1: 3})) is None


def test_basis_trunc_reduced_drops_dependents():
    b = cusp_basis_from_generators(12, 2, 4)
    e = b.elements[0]
    dup = BasisTrunc(12, 2, 4, [e, e.scale(3)] + b.elements[1:])
    assert dup.reduced().rank == b.rank
