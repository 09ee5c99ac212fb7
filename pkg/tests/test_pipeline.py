from fractions import Fraction

import pytest

from paramodular.borcherds import bp_expand, involution_scan
from paramodular.jacobi import weak_generators
from paramodular.pipeline import BasisShortfall, SearchConfig, offset_shape, run_search
from paramodular.records import ResultRecord
from paramodular.theta import tb_invariants


def test_offset_shape():
    assert offset_shape(0) == (0, 1, "G + O(q)")
    assert offset_shape(1) == (0, -1, "q^-1 + G + O(q)")
    assert offset_shape(2)[:2] == (1, 1)
    assert offset_shape(5)[:2] == (1, None)
    with pytest.raises(ValueError):
        offset_shape(-1)


@pytest.mark.parametrize("kw", [dict(c=0), dict(t=-1), dict(nextra=-2), dict(cap=0),
                                dict(step5_policy="retry"), dict(strategies=("guess",))])
def test_config_validation(kw):
    base = dict(k=10, N=1, c=1, t=0)
    base.update(kw)
    with pytest.raises(ValueError):
        SearchConfig(**base)


def _assert_product_conditions(rec):
    psi = rec.psi
    assert all(Fraction(v).denominator == 1 for v in psi.singular_vector)
    assert psi.A.denominator == 1
    assert psi.coeffs.at(0) == tb_invariants(rec.theta_block).germ
    assert rec.humbert_nonnegative
    assert rec.confirmation is not None


@pytest.fixture(scope="module")
def igusa_run():
    return run_search(SearchConfig(10, 1, 1, 0, nextra=4))


def test_igusa_search(igusa_run):
    assert [str(b) for b in igusa_run.blocks] == ["0^20 1^2"]
    (rec,) = igusa_run.records
    _assert_product_conditions(rec)
    assert rec.symmetry == 1 and rec.cusp.is_cusp
    p01 = weak_generators(8)["phi_0_1"].series.scale(2)
    assert rec.psi.coeffs.equal_through(p01, rec.psi.prec)


def test_antisymmetric_search_has_vanishing_diagonal():
    out = run_search(SearchConfig(9, 16, 1, 1))
    (rec,) = out.records
    _assert_product_conditions(rec)
    assert str(rec.theta_block) == "0^18 1^11 2^3 3^1"
    assert rec.symmetry == -1 and rec.cusp.is_cusp
    fj = bp_expand(rec, 1, 3)
    assert involution_scan(fj, 1, 16, -1) == []


def test_step5_policies_at_short_truncation():
    flag = run_search(SearchConfig(46, 4, 1, 3, nextra=4, step5_policy="flag",
                                   skip_cusp_test=True))
    d = flag.diagnostics_for("0^92 2^2")
    assert (d.step4_dim, d.step5_rank, d.step5_strict_independent) == (15, 15, False)
    assert "step5-strict-dependence" in d.flags
    abort = run_search(SearchConfig(46, 4, 1, 3, nextra=4, step5_policy="abort",
                                    skip_cusp_test=True))
    assert not abort.records and not abort.ok
    (ab,) = abort.aborts
    assert ab.step == "step5-strict-dependence" and "nextra" in ab.remedy


def _psi_key(rec, prec):
    return (str(rec.theta_block), tuple(sorted(rec.psi.coeffs.truncate_abs(prec).items())))


def test_longer_truncation_is_monotone():
    short = run_search(SearchConfig(46, 4, 1, 3, nextra=5, skip_cusp_test=True))
    long = run_search(SearchConfig(46, 4, 1, 3, nextra=8, skip_cusp_test=True))
    assert short.diagnostics[0].ilp_status == "complete"
    p = min(r.psi.prec for r in short.records)
    assert {_psi_key(r, p) for r in long.records} <= {_psi_key(r, p) for r in short.records}
    for r in short.records + long.records:
        _assert_product_conditions(r)


def test_basis_shortfall_names_remedy():
    with pytest.raises(BasisShortfall) as exc:
        run_search(SearchConfig(2, 249, 1, 0))
    e = exc.value
    assert (e.k, e.m) == (2, 498) and "qorder" in e.remedy


def test_threads_do_not_change_results():
    runs = [run_search(SearchConfig(9, 16, 1, 0, threads=n)) for n in (1, 4)]
    js = [[ResultRecord.from_record(r).to_json() for r in o.records] for o in runs]
    assert js[0] == js[1]
    # ten holomorphic products, six from the first block and four from the second
    assert len(runs[0].records_for("0^18 1^-5 2^7 3^1")) == 6
    assert len(runs[0].records_for("0^18 1^-1 2^2 3^1 4^1")) == 4
    for r in runs[0].records:
        _assert_product_conditions(r)


def test_explicit_block_selection():
    out = run_search(SearchConfig(9, 16, 1, 0, blocks=("1^-5 2^7 3^1",)))
    assert [str(b) for b in out.blocks] == ["0^18 1^-5 2^7 3^1"]
    assert all(str(r.theta_block) == "0^18 1^-5 2^7 3^1" for r in out.records)
