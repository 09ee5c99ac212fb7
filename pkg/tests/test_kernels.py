import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paramodular import kernels
from paramodular.series import LaurentPoly, lp_divide
from paramodular.theta import tb_enumerate, tb_expand

compiled = pytest.mark.skipif(kernels._c is None, reason="compiled kernels not built")


@pytest.fixture
def backend():
    before = kernels.BACKEND
    yield kernels.set_backend
    kernels.set_backend(before)


def blocks(max_abs):
    return st.tuples(st.integers(1, 6), st.integers(1, 8)).flatmap(
        lambda s: st.lists(st.integers(-max_abs, max_abs), min_size=s[0] * s[1],
                           max_size=s[0] * s[1]).map(
            lambda v: np.array(v, dtype=object).reshape(s)))


def _conv_oracle(a, b, rows):
    out = np.zeros((rows, a.shape[1] + b.shape[1] - 1), dtype=object)
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            if i + j < rows:
                for x in range(a.shape[1]):
                    for y in range(b.shape[1]):
                        out[i + j, x + y] += a[i, x] * b[j, y]
    return out


@compiled
@settings(max_examples=60, deadline=None)
@given(blocks(10**6), blocks(10**6), st.integers(1, 8))
def test_conv2d_backends_agree(a, b, rows):
    want = _conv_oracle(a, b, rows)
    for name in ("python", "cython"):
        kernels.set_backend(name)
        got = kernels.conv2d(a, b, rows)
        assert np.array_equal(np.asarray(got, dtype=object), want)
    kernels.set_backend("cython")


@compiled
def test_conv2d_overflow_falls_back(backend):
    backend("cython")
    a = np.array([[2**62, 2**62]], dtype=object)
    got = kernels.conv2d(a, a, 1)
    assert got.tolist() == [[2**124, 2**125, 2**124]]


@compiled
@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=20),
       st.lists(st.integers(-5, 5), max_size=6), st.sampled_from([1, -1]))
def test_poly_divmod_backends_agree(a, mid, lead):
    b = mid + [lead]
    res = []
    for name in ("python", "cython"):
        kernels.set_backend(name)
        q, r = kernels.poly_divmod(np.array(a, dtype=np.int64), np.array(b, dtype=np.int64))
        res.append(([int(x) for x in q], [int(x) for x in r]))
    kernels.set_backend("cython")
    assert res[0] == res[1]


@compiled
def test_shift_accumulate_backends_agree(backend):
    rng = np.random.default_rng(3)
    src = rng.integers(-9, 9, size=(4, 5))
    terms = [(0, 0, 1), (1, 2, -1), (2, 1, 7), (5, 0, 3)]
    outs = []
    for name in ("python", "cython"):
        backend(name)
        dst = np.zeros((6, 9), dtype=np.int64)
        outs.append(np.asarray(kernels.shift_accumulate(src, dst, terms), dtype=object))
    assert np.array_equal(outs[0], outs[1])


@compiled
@pytest.mark.parametrize("k,m,A", [(9, 32, 2), (9, 16, 1), (46, 4, 4), (2, 249, 1)])
def test_enumeration_backends_agree(backend, k, m, A):
    found = []
    for name in ("python", "cython"):
        backend(name)
        found.append([str(t) for t in tb_enumerate(k, m, A, allow_denominator=True)])
    assert found[0] == found[1]


@compiled
def test_expansion_and_division_backends_agree(backend):
    outs = []
    b = LaurentPoly({0: 1, 3: -2, 5: 1})
    a = b * LaurentPoly({r: r * r - 7 for r in range(-30, 30)})
    for name in ("python", "cython"):
        backend(name)
        s = tb_expand("0^4 1^2 2^2 3^2 4^1 5^1 14^1 17^1", 12)
        outs.append((sorted(s.items()), lp_divide(a, b)))
    assert outs[0] == outs[1]


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
