import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_fn_points
from oracles import mp_integer_trace, mp_word_trace
from qfslice.farey import INF_SLOPE, Slope, slope, special_word
from qfslice.representation import DegenerateLength, FNPoint, psi_fn
from qfslice.traces import (
    NoSignChange,
    bisect_real_locus,
    eval_poly,
    real_locus_b,
    trace,
    trace_direct,
    trace_poly,
)


def rel(a, b):
    return abs(a - b) / (1 + abs(b))


@pytest.mark.parametrize("n", [-3, -1, 0, 1, 2, 5])
def test_integer_traces_closed_form(n):
    for pt in random_fn_points(10, seed=n + 10):
        assert rel(trace(Slope(n, 1), pt), mp_integer_trace(n, pt.lam, pt.tau)) < 1e-12


def test_base_traces_match_psi():
    for pt in random_fn_points(20, seed=1):
        x, y, z = psi_fn(pt)
        assert rel(trace(INF_SLOPE, pt), x) < 1e-12
        assert rel(trace(Slope(0, 1), pt), y) < 1e-12
        assert rel(trace(Slope(1, 1), pt), z) < 1e-12


def test_poly_shape():
    tp = trace_poly(Slope(2, 5), 1.3 + 0.1j)
    assert len(tp.coeffs) == 11
    # only k = q mod 2 terms survive
    assert all(tp.coeff(k) == 0 for k in range(-5, 6) if k % 2 == 0)
    assert tp.coeff(7) == 0


@pytest.mark.parametrize("s", [Slope(1, 2), Slope(-3, 4), Slope(7, 5), Slope(-11, 13), Slope(17, 29)])
def test_poly_against_mp_word_oracle(s):
    # mirrored word: the explicit matrices realise tr_{p/q} with g_{-p/q}
    w = special_word(slope(-s.p, s.q))
    for pt in random_fn_points(8, seed=s.q):
        ref = mp_word_trace(w, pt.lam, pt.tau)
        assert rel(trace(s, pt), ref) < 1e-10


@pytest.mark.parametrize("s", [Slope(1, 3), Slope(-2, 7), Slope(5, 11)])
def test_direct_against_mp_word_oracle(s):
    w = special_word(slope(-s.p, s.q))
    for pt in random_fn_points(8, seed=100 + s.q):
        assert rel(trace_direct(s, pt), mp_word_trace(w, pt.lam, pt.tau)) < 1e-9


def test_near_strip_boundary_is_accurate():
    # monomial sums cancel badly here; the evaluator must not
    s = Slope(13, 30)
    w = special_word(slope(-s.p, s.q))
    for t in (-2.0, 0.3, 2.5):
        tau = complex(t, math.pi - 1e-3)
        pt = FNPoint(2.0 + 0.5j, tau)
        assert rel(trace(s, pt), mp_word_trace(w, pt.lam, pt.tau)) < 1e-10


@given(st.integers(1, 12), st.integers(-20, 20), st.floats(0.5, 4), st.floats(-2, 2), st.floats(-3, 3))
def test_farey_recursion(q, p, l, t, b):
    if math.gcd(p, q) != 1:
        return
    # tr_{L+R} + tr_{R-L} = tr_L tr_R for neighbours L = n/1 and R = (n+1)/1 style pairs
    s = Slope(p, q)
    n = p // q
    L, R = Slope(n, 1), Slope(n + 1, 1)
    pt = FNPoint(complex(l), complex(t, b))
    lhs = trace(slope(L.p + R.p, L.q + R.q), pt) + trace(INF_SLOPE, pt)
    rhs = trace(L, pt) * trace(R, pt)
    assert rel(lhs, rhs) < 1e-9
    del s


@given(st.floats(0.3, 5), st.floats(-3, 3), st.floats(-3, 3), st.integers(1, 9), st.integers(-9, 9))
def test_twist_relation(l, t, b, q, p):
    # tr_{(p+q)/q}(tau) = tr_{p/q}(tau + lam) at real lam: twisting by 1/0
    if math.gcd(p, q) != 1:
        return
    s = Slope(p, q)
    a = trace(s, FNPoint(complex(l), complex(t + l, b)))
    c = trace(slope(p + q, q), FNPoint(complex(l), complex(t, b)))
    assert rel(a, c) < 1e-9


def test_conjugation_symmetry():
    s = Slope(3, 7)
    for pt in random_fn_points(5, seed=4):
        a = trace(s, pt)
        c = trace(s, pt.conjugate())
        assert rel(c, a.conjugate()) < 1e-10


def test_saturation():
    tp = trace_poly(Slope(1, 500), 700.0)
    assert tp.saturated
    assert math.isinf(eval_poly(tp, 0.1).real)


def test_degenerate_lambda():
    with pytest.raises(DegenerateLength):
        trace_poly(Slope(1, 2), 0j)


@pytest.mark.parametrize("t", [20.0, -20.0])
@pytest.mark.parametrize("j", [-1, 0, 1])
def test_real_locus_bisection(t, j):
    s = Slope(1, 4)
    b, iters = bisect_real_locus(s, 1.0, t, j)
    assert iters <= 80
    assert (2 * j - 1) * math.pi / 4 < b < (2 * j + 1) * math.pi / 4
    v = trace(s, FNPoint(1.0, complex(t, b)))
    assert abs(v.imag) <= 1e-10 * (1 + abs(v))
    assert real_locus_b(s, 1.0, t, j) == b


def test_real_locus_errors():
    with pytest.raises(NoSignChange):
        real_locus_b(Slope(1, 4), 1.0, 0.01, 1)
    with pytest.raises(ValueError):
        real_locus_b(Slope(1, 4), 1.0, 20.0, 2)
    with pytest.raises(ValueError):
        real_locus_b(INF_SLOPE, 1.0, 20.0, 0)


def test_coeffs_are_finite_doubles():
    tp = trace_poly(Slope(5, 17), 2.0 - 1.0j)
    assert tp.coeffs.dtype == np.complex128
    assert np.all(np.isfinite(tp.coeffs))
