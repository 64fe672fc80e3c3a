"""SL(2,C) matrices acting as Mobius maps, trace classification, complex length."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

INFINITY = complex(math.inf, 0.0)


def is_infinity(z: complex) -> bool:
    return cmath.isinf(z)


@dataclass(frozen=True)
class Mat2C:
    """Row-major 2x2 complex matrix [[a, b], [c, d]]."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __matmul__(self, other: "Mat2C") -> "Mat2C":
        return compose(self, other)

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "Mat2C":
        # valid for det == 1
        return Mat2C(self.d, -self.b, -self.c, self.a)

    def is_finite(self) -> bool:
        return all(cmath.isfinite(v) for v in (self.a, self.b, self.c, self.d))

    def max_entry(self) -> float:
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))

    def det_ok(self, tol: float = 1e-9) -> bool:
        return abs(self.det - 1) <= tol * max(1.0, self.max_entry()) ** 2


IDENTITY = Mat2C(1, 0, 0, 1)


def compose(A: Mat2C, B: Mat2C) -> Mat2C:
    return Mat2C(
        A.a * B.a + A.b * B.c,
        A.a * B.b + A.b * B.d,
        A.c * B.a + A.d * B.c,
        A.c * B.b + A.d * B.d,
    )


class IsomClass(enum.Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    LOXODROMIC = "loxodromic"


def classify(t: complex, eps: float | None = None) -> IsomClass:
    """Isometry type from the trace alone; never returns IDENTITY.

    The default tolerance is 1e-9 * max(1, |t|).
    """
    if eps is None:
        eps = 1e-9 * max(1.0, abs(t))
    if eps <= 0:
        raise ValueError("eps must be positive")
    t = complex(t)
    if abs(t.imag) > eps:
        return IsomClass.LOXODROMIC
    a = abs(t.real)
    if abs(a - 2.0) <= eps:
        return IsomClass.PARABOLIC
    if a < 2.0 - eps:
        return IsomClass.ELLIPTIC
    return IsomClass.HYPERBOLIC


def _wrap_imag(w: complex) -> complex:
    """Reduce Im w into (-pi, pi]."""
    im = math.remainder(w.imag, 2 * math.pi)
    if im <= -math.pi:
        im += 2 * math.pi
    return complex(w.real, im)


def complex_length_from_trace(t: complex) -> complex:
    """Complex length lambda with 2cosh(lambda/2) = +-t.

    Normalized to Re >= 0 and Im in (-pi, pi]; when Re == 0 both +-lambda are
    admissible and the one with Im >= 0 is returned.
    """
    w = 2 * cmath.acosh(complex(t) / 2)
    if w.real < 0:
        w = -w
    w = _wrap_imag(w)
    if w.real == 0 and w.imag < 0:
        w = _wrap_imag(-w)
    return w


def apply(A: Mat2C, z: complex) -> complex:
    """Mobius action z -> (az + b)/(cz + d) on the Riemann sphere."""
    if is_infinity(z):
        if A.c == 0:
            return INFINITY
        return A.a / A.c
    num = A.a * z + A.b
    den = A.c * z + A.d
    if den == 0:
        return INFINITY
    return num / den
