from fractions import Fraction

from hypothesis import given, settings, strategies as st

from paramodular.ilp import (Capped, Complete, IlpProblem, Unbounded, brute_force_box,
                             ilp_enumerate, lp_max)


@st.composite
def boxed_problems(draw):
    """Random constraints intersected with a box, so the oracle sees every solution."""
    d = draw(st.integers(1, 3))
    R = draw(st.integers(0, 3))
    M, b = [], []
    for i in range(d):
        e = [int(j == i) for j in range(d)]
        M += [e, [-v for v in e]]
        b += [R, R]
    for _ in range(draw(st.integers(0, 4))):
        M.append(draw(st.lists(st.integers(-4, 4), min_size=d, max_size=d)))
        b.append(draw(st.integers(-6, 6)))
    return IlpProblem(M, b, cap=10_000), R


@settings(max_examples=150, deadline=None)
@given(boxed_problems())
def test_enumeration_matches_box_oracle(prob_R):
    p, R = prob_R
    res = ilp_enumerate(p)
    assert isinstance(res, Complete)
    assert res.solutions == brute_force_box(p, R)  # both lexicographic


@settings(max_examples=60, deadline=None)
@given(boxed_problems(), st.integers(1, 5))
def test_cap_truncates_prefix(prob_R, cap):
    p, R = prob_R
    full = brute_force_box(p, R)
    res = ilp_enumerate(IlpProblem(p.M, p.b, cap=cap, d=p.d))
    if len(full) >= cap:
        assert isinstance(res, Capped) and res.solutions == full[:cap]
    else:
        assert isinstance(res, Complete) and res.solutions == full


def test_unbounded_ray_is_certified():
    # x >= 0, y >= 0, x - y >= -1: the ray (1, 1) stays inside
    p = IlpProblem([[1, 0], [0, 1], [1, -1]], [0, 0, 1])
    res = ilp_enumerate(p)
    assert isinstance(res, Unbounded)
    ray = res.direction
    assert any(ray) and all(sum(a * v for a, v in zip(row, ray)) >= 0 for row in p.M)


def test_infeasible_and_degenerate():
    assert ilp_enumerate(IlpProblem([[1], [-1]], [-1, 0])).solutions == []
    # 2x = 1 has no integer point
    assert ilp_enumerate(IlpProblem([[2], [-2]], [-1, 1])).solutions == []
    assert ilp_enumerate(IlpProblem([], [], d=0)).solutions == [()]


def test_lp_max():
    st_, val, x = lp_max([1, 1], [[1, 0], [0, 1], [1, 1]], [2, 2, 3])
    assert st_ == "optimal" and val == 3
    assert lp_max([1, 0], [[-1, 0]], [0])[0] == "unbounded"
    assert lp_max([1], [[1], [-1]], [-1, -1])[0] == "infeasible"
    st_, val, x = lp_max([Fraction(1, 2)], [[2]], [3])
    assert val == Fraction(3, 4) and x == [Fraction(3, 2)]
