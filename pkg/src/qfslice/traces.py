"""Trace functions tr_{p/q}(lambda, tau) as Laurent polynomials in u = exp(tau/2).

For fixed lambda, tr_{p/q} = sum_{k=-q..q} c_k u^k, built from the integer
traces by the Farey recursion tr_{L+R} = tr_L tr_R - tr_{R-L}.

The monomial expansion cancels badly once |Im tau| approaches pi (the sum of
|c_k u^k| can exceed |tr| by 1e20 for q ~ 30), so coefficients are built and
evaluated with 192-bit gmpy2 arithmetic. ``TracePoly.coeffs`` is the rounded
complex128 copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpc

from .farey import Slope, slope, special_word
from .representation import DegenerateLength, FNPoint, evaluate_word, matrices

SATURATION = 1e150
PRECISION = 192

_ZERO = mpc(0)


def _ctx():
    return gmpy2.context(precision=PRECISION)


class NoSignChange(ValueError):
    """Im(tr) has the same sign at both ends of the bisection interval."""


@dataclass(frozen=True, eq=False)
class TracePoly:
    slope: Slope
    lam: complex
    coeffs: np.ndarray  # c_k at index k + q, rounded to complex128
    exact: tuple = ()  # the same coefficients at PRECISION bits
    saturated: bool = False

    @property
    def q(self) -> int:
        return self.slope.q

    def coeff(self, k: int) -> complex:
        if abs(k) > self.q:
            return 0j
        return complex(self.coeffs[k + self.q])

    def __call__(self, tau: complex) -> complex:
        return eval_poly(self, tau)


def _inv_tanh(lam: mpc) -> mpc:
    th = gmpy2.tanh(lam / 2)
    if th == 0 or not gmpy2.is_finite(th):
        raise DegenerateLength(f"tanh(lambda/2) vanishes at lambda = {complex(lam)}")
    return 1 / th


def _integer_coeffs(n: int, lam: mpc) -> list:
    it = _inv_tanh(lam)
    return [gmpy2.exp(-n * lam / 2) * it, _ZERO, gmpy2.exp(n * lam / 2) * it]


def _combine(cl: list, cr: list, cd: list) -> list:
    """cl * cr - cd with cd centred; zero entries are skipped (parity lattice)."""
    out = [_ZERO] * (len(cl) + len(cr) - 1)
    nzr = [(j, b) for j, b in enumerate(cr) if b != 0]
    for i, a in enumerate(cl):
        if a == 0:
            continue
        for j, b in nzr:
            out[i + j] += a * b
    pad = (len(out) - len(cd)) // 2
    for k, c in enumerate(cd):
        if c != 0:
            out[pad + k] -= c
    return out


def _finish(s: Slope, lam: complex, exact: list) -> TracePoly:
    coeffs = np.array([complex(c) for c in exact], dtype=complex)
    coeffs.setflags(write=False)
    saturated = not bool(np.all(np.abs(coeffs) <= SATURATION))
    return TracePoly(s, lam, coeffs, tuple(exact), saturated)


@lru_cache(maxsize=8192)
def _trace_poly_cached(p: int, q: int, lam: complex) -> TracePoly:
    s = Slope(p, q)
    with _ctx():
        ml = mpc(lam)
        if q == 0:
            return _finish(s, lam, [2 * gmpy2.cosh(ml / 2)])
        if q == 1:
            return _finish(s, lam, _integer_coeffs(p, ml))
        # rolling Farey triangle (L, R, D) with D = R - L, walking toward s
        n = p // q
        L, R = Slope(n, 1), Slope(n + 1, 1)
        cl, cr = _integer_coeffs(n, ml), _integer_coeffs(n + 1, ml)
        cd = [2 * gmpy2.cosh(ml / 2)]
        while True:
            m = Slope(L.p + R.p, L.q + R.q)
            cm = _combine(cl, cr, cd)
            if m == s:
                return _finish(s, lam, cm)
            if p * m.q < m.p * q:
                R, cr, cd = m, cm, cr
            else:
                L, cl, cd = m, cm, cl


def trace_poly(s: Slope, lam: complex) -> TracePoly:
    """Laurent coefficients of tr_s(lam, .) in exp(tau/2)."""
    return _trace_poly_cached(s.p, s.q, complex(lam))


def eval_poly(tp: TracePoly, tau: complex) -> complex:
    """Evaluate sum c_k exp(k tau/2) by Horner in u and 1/u separately."""
    if tp.saturated:
        return complex(math.inf, 0.0)
    q = tp.q
    c = tp.exact
    if q == 0:
        return complex(c[0])
    with _ctx():
        u = gmpy2.exp(mpc(complex(tau)) / 2)
        v = 1 / u
        pos = _ZERO
        for ck in reversed(c[q:]):  # c_q ... c_0
            pos = pos * u + ck
        neg = _ZERO
        for ck in c[:q]:  # c_{-q} ... c_{-1}
            neg = (neg + ck) * v
        return complex(pos + neg)


def trace_direct(s: Slope, pt: FNPoint) -> complex:
    """Trace of tr_s computed by multiplying out explicit matrices.

    In the explicit model the word a^-n b carries the trace of -n/1, so the
    slope is mirrored (p -> -p) before the special word is taken.
    """
    return evaluate_word(special_word(slope(-s.p, s.q)), matrices(pt)).trace


def trace(s: Slope, pt: FNPoint) -> complex:
    return eval_poly(trace_poly(s, pt.lam), pt.tau)


def real_locus_b(s: Slope, l: float, t: float, j: int, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Bisection for b in ((2j-1)pi/q, (2j+1)pi/q) with Im tr_s(l, t + bi) = 0.

    Returns the first midpoint where |Im tr| <= tol * (1 + |tr|). Raises
    NoSignChange when Im tr has equal signs at the interval ends, which is
    expected for small |t|.
    """
    return bisect_real_locus(s, l, t, j, tol, max_iter)[0]


def bisect_real_locus(s: Slope, l: float, t: float, j: int, tol: float = 1e-10, max_iter: int = 200) -> tuple[float, int]:
    """real_locus_b plus the number of midpoint evaluations used."""
    if s.q < 1:
        raise ValueError("real_locus_b needs q >= 1")
    if not abs(j) < s.q / 2:
        raise ValueError("need |j| < q/2")
    tp = trace_poly(s, complex(l))
    lo = (2 * j - 1) * math.pi / s.q
    hi = (2 * j + 1) * math.pi / s.q
    flo = eval_poly(tp, complex(t, lo)).imag
    fhi = eval_poly(tp, complex(t, hi)).imag
    if flo == 0 or fhi == 0 or (flo > 0) == (fhi > 0):
        raise NoSignChange(f"no sign change of Im tr_{s} on [{lo:.6g}, {hi:.6g}] at t={t}")
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        v = eval_poly(tp, complex(t, mid))
        if abs(v.imag) <= tol * (1 + abs(v)):
            return mid, it
        if (v.imag > 0) == (flo > 0):
            lo, flo = mid, v.imag
        else:
            hi = mid
    raise NoSignChange(f"bisection for tr_{s} did not converge in {max_iter} steps")
