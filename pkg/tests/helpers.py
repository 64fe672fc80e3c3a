"""Shared sampling helpers for the tests."""

import math

import numpy as np


def random_fn_points(n, seed=0):
    """FNPoints in the sampling box Re lam in [0.5, 6], Im lam in [-2.5, 2.5],
    Re tau in [-3, 3], Im tau in [-pi, pi)."""
    from qfslice.representation import FNPoint

    rng = np.random.default_rng(seed)
    lam = rng.uniform(0.5, 6, n) + 1j * rng.uniform(-2.5, 2.5, n)
    tau = rng.uniform(-3, 3, n) + 1j * rng.uniform(-math.pi, math.pi, n)
    return [FNPoint(complex(a), complex(b)) for a, b in zip(lam, tau)]


def close(a, b, rel=1e-9):
    return abs(a - b) <= rel * (1 + abs(b))
