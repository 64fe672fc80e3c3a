"""Slopes p/q on the punctured torus, Farey triangles and Keen-Series special words.

Words are strings over ``a``, ``b`` with capitals for inverses (``A`` = a^-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

SLOPE_LIMIT = 2**60


@dataclass(frozen=True)
class Slope:
    p: int
    q: int

    def __post_init__(self):
        if self.q < 0 or (self.q == 0 and self.p != 1):
            raise ValueError(f"non-canonical slope {self.p}/{self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"slope {self.p}/{self.q} is not reduced")
        if abs(self.p) > SLOPE_LIMIT or self.q > SLOPE_LIMIT:
            raise OverflowError(f"slope {self.p}/{self.q} exceeds 2^60")

    def __str__(self):
        return f"{self.p}/{self.q}"

    @property
    def vector(self) -> tuple[int, int]:
        return (self.p, self.q)

    @property
    def value(self) -> float:
        return math.inf if self.q == 0 else self.p / self.q


INF_SLOPE = Slope(1, 0)


def slope(p: int, q: int) -> Slope:
    """Canonical slope for the homology vector (p, q) taken up to sign."""
    if p == 0 and q == 0:
        raise ValueError("0/0 is not a slope")
    g = math.gcd(p, q)
    p, q = p // g, q // g
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return Slope(p, q)


def parse_slope(text: str) -> Slope:
    """Parse "p/q" (e.g. "1/0", "-3/7"); a bare integer means n/1."""
    text = text.strip()
    if "/" in text:
        ps, qs = text.split("/", 1)
        p, q = int(ps), int(qs)
    else:
        p, q = int(text), 1
    return slope(p, q)


FareyTriple = tuple[Slope, Slope, Slope]

BASE_TRIPLE: FareyTriple = (INF_SLOPE, Slope(0, 1), Slope(1, 1))


def _det(u: Slope, v: Slope) -> int:
    return u.p * v.q - u.q * v.p


def is_neighbor(u: Slope, v: Slope) -> bool:
    return abs(_det(u, v)) == 1


def is_farey_triple(t: Sequence[Slope]) -> bool:
    return (
        len(t) == 3
        and is_neighbor(t[0], t[1])
        and is_neighbor(t[1], t[2])
        and is_neighbor(t[0], t[2])
    )


def flip(t: FareyTriple, index: int) -> FareyTriple:
    """Replace vertex ``index`` by the other triangle across the opposite edge."""
    u, v = (t[i] for i in range(3) if i != index)
    old = t[index]
    new = slope(u.p + v.p, u.q + v.q)
    if new == old:
        new = slope(u.p - v.p, u.q - v.q)
    out = list(t)
    out[index] = new
    return tuple(out)


def stern_brocot_path(s: Slope) -> list[FareyTriple]:
    """Farey triangles from the integer base triangle down to one containing ``s``.

    The base triangle is (n/1, 1/0, (n+1)/1) with n = floor(p/q); for an
    integer slope n/1 it is ((n-1)/1, 1/0, n/1). Each subsequent triangle
    replaces the vertex opposite the edge bracketing ``s`` by that edge's
    mediant, so the last triangle has ``s`` as its newest vertex.
    """
    if s.q < 1:
        raise ValueError("stern_brocot_path needs q >= 1")
    if s.q == 1:
        return [(Slope(s.p - 1, 1), INF_SLOPE, s)]
    n = s.p // s.q
    tri = [Slope(n, 1), INF_SLOPE, Slope(n + 1, 1)]
    left, right, opp = 0, 2, 1
    path = [tuple(tri)]
    while True:
        L, R = tri[left], tri[right]
        m = Slope(L.p + R.p, L.q + R.q)
        tri[opp] = m
        path.append(tuple(tri))
        if m == s:
            return path
        # s * m.q < m.p * s.q  <=>  s < m  (both denominators positive)
        if s.p * m.q < m.p * s.q:
            opp, right = right, opp
        else:
            opp, left = left, opp


def reduce_word(w: str) -> str:
    out: list[str] = []
    for ch in w:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def invert_word(w: str) -> str:
    return w[::-1].swapcase()


@lru_cache(maxsize=4096)
def special_word(s: Slope) -> str:
    """Special word g_{p/q}: g_{1/0} = a, g_{n/1} = a^-n b, and
    g_{(p+r)/(q+s)} = g_{r/s} g_{p/q} for Farey neighbours p/q < r/s."""
    if s.q == 0:
        return "a"
    if s.q == 1:
        n = s.p
        return ("A" * n if n >= 0 else "a" * (-n)) + "b"
    # walk the Stern-Brocot interval (L, R) down to s
    n = s.p // s.q
    L, R = Slope(n, 1), Slope(n + 1, 1)
    wl, wr = special_word(L), special_word(R)
    while True:
        m = Slope(L.p + R.p, L.q + R.q)
        wm = reduce_word(wr + wl)
        if m == s:
            return wm
        if s.p * m.q < m.p * s.q:
            R, wr = m, wm
        else:
            L, wl = m, wm


def twist_slope(m: Sequence[Sequence[int]], s: Slope) -> Slope:
    """Image of the homology class of ``s`` under an SL(2,Z) matrix."""
    (m11, m12), (m21, m22) = m
    if m11 * m22 - m12 * m21 != 1:
        raise ValueError("twist matrix must have determinant 1")
    return slope(m11 * s.p + m12 * s.q, m21 * s.p + m22 * s.q)


DEHN_1_0 = ((1, 1), (0, 1))
DEHN_0_1 = ((1, 0), (-1, 1))
