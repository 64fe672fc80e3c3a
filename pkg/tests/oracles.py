"""Independent high-precision references.

These use mpmath only and share no code with the package beyond the word
alphabet: traces come from multiplying the explicit generator matrices, not
from the Laurent recursion.
"""

import mpmath as mp

mp.mp.prec = 200


def mp_matrices(lam, tau):
    e1 = mp.exp(mp.mpc(lam) / 2)
    t1 = mp.exp(mp.mpc(tau))
    e2 = e1 * e1
    A = mp.matrix([[e1, 2 / e1], [0, 1 / e1]])
    s = 1 / (mp.sqrt(t1) * (e2 - 1))
    B = mp.matrix([[((e2 + 1) * t1 + 2) * s, -2 * (t1 + 1) * s], [(1 - e2) * s, (e2 - 1) * s]])
    return A, B


def mp_inverse(M):
    return mp.matrix([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])


def mp_word_trace(word, lam, tau):
    A, B = mp_matrices(lam, tau)
    gens = {"a": A, "A": mp_inverse(A), "b": B, "B": mp_inverse(B)}
    M = mp.eye(2)
    for ch in word:
        M = M * gens[ch]
    return complex(M[0, 0] + M[1, 1])


def mp_integer_trace(n, lam, tau):
    """2cosh((tau + n lam)/2) / tanh(lam/2)."""
    lam, tau = mp.mpc(lam), mp.mpc(tau)
    return complex(2 * mp.cosh((tau + n * lam) / 2) / mp.tanh(lam / 2))
