"""Complex Fenchel-Nielsen coordinates (lambda, tau) and the SL(2,C) character variety.

A point (lambda, tau) maps to the Markov triple

    (2cosh(lambda/2), 2cosh(tau/2)/tanh(lambda/2), 2cosh((tau+lambda)/2)/tanh(lambda/2))

of traces of (a, b, ab). The twist parameter lives on the strip
-pi <= Im(tau) < pi.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

from .mobius import IDENTITY, Mat2C, compose

TWIST_STRIP = (-math.pi, math.pi)


class DegenerateLength(ValueError):
    """exp(lambda/2) is 0, +-1 or +-i, so the explicit matrices are undefined."""


@dataclass(frozen=True)
class FNPoint:
    lam: complex
    tau: complex

    def in_domain(self) -> bool:
        lam = complex(self.lam)
        return lam.real > 0 and -math.pi < lam.imag < math.pi

    def twisted(self, k: int = 1) -> "FNPoint":
        """Dehn twist along 1/0 applied k times: tau -> tau + k*lambda."""
        return FNPoint(self.lam, self.tau + k * self.lam)

    def conjugate(self) -> "FNPoint":
        return FNPoint(complex(self.lam).conjugate(), complex(self.tau).conjugate())


class CharPoint(NamedTuple):
    x: complex
    y: complex
    z: complex


def psi_fn(pt: FNPoint) -> CharPoint:
    lam, tau = complex(pt.lam), complex(pt.tau)
    th = cmath.tanh(lam / 2)
    x = 2 * cmath.cosh(lam / 2)
    y = 2 * cmath.cosh(tau / 2) / th
    z = 2 * cmath.cosh((tau + lam) / 2) / th
    return CharPoint(x, y, z)


def markov_residual(c: CharPoint) -> complex:
    x, y, z = c
    return x * x + y * y + z * z - x * y * z


def markov_scale(c: CharPoint) -> float:
    return (1 + max(abs(c.x), abs(c.y), abs(c.z))) ** 3


SIGN_CLASSES = {
    (1, 1): (1, 1, 1),
    (-1, 1): (-1, 1, -1),
    (1, -1): (1, -1, -1),
    (-1, -1): (-1, -1, 1),
}


def h1_action(sign_class: tuple[int, int], c: CharPoint) -> CharPoint:
    """Action of H^1(S; Z/2): [a] -> (-x, y, -z), [b] -> (x, -y, -z)."""
    sx, sy, sz = SIGN_CLASSES[tuple(sign_class)]
    return CharPoint(sx * c.x, sy * c.y, sz * c.z)


class RepPair(NamedTuple):
    A: Mat2C
    B: Mat2C


def matrices(pt: FNPoint) -> RepPair:
    """Explicit generators with e1 = exp(lambda/2), t1 = exp(tau).

    rho(a) = [[e1, 2/e1], [0, 1/e1]] and
    rho(b) = [[(e1^2+1)t1 + 2, -2(t1+1)], [1 - e1^2, e1^2 - 1]] / (sqrt(t1)(e1^2 - 1)),
    with the principal square root.
    """
    e1 = cmath.exp(complex(pt.lam) / 2)
    for bad in (1, -1, 1j, -1j):
        if abs(e1 - bad) <= 1e-12:
            raise DegenerateLength(f"exp(lambda/2) = {e1} is degenerate")
    t1 = cmath.exp(complex(pt.tau))
    e2 = e1 * e1
    A = Mat2C(e1, 2 / e1, 0j, 1 / e1)
    s = 1 / (cmath.sqrt(t1) * (e2 - 1))
    B = Mat2C(
        ((e2 + 1) * t1 + 2) * s,
        -2 * (t1 + 1) * s,
        (1 - e2) * s,
        (e2 - 1) * s,
    )
    return RepPair(A, B)


_LETTERS = {"a": 0, "A": 1, "b": 2, "B": 3}


def evaluate_word(w: str, rep: RepPair) -> Mat2C:
    gens = (rep.A, rep.A.inverse(), rep.B, rep.B.inverse())
    m = IDENTITY
    for ch in w:
        m = compose(m, gens[_LETTERS[ch]])
    return m


def commutator_trace(rep: RepPair) -> complex:
    A, B = rep
    return compose(compose(A, B), compose(A.inverse(), B.inverse())).trace
