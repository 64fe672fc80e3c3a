"""Bowditch-condition classifier on the Markov-triple tree.

A point (lambda, tau) is classified QF when the Bowditch conditions hold: no
simple-curve trace lies in [-2, 2] and only finitely many have modulus <= 2.

The search enumerates Omega(K) = {slopes X : |tr X| <= K}, which is connected
for every K >= 2. Around a region X the neighbouring traces satisfy
y_{n+1} = x y_n - y_{n-1}, so y_n = A mu^n + B mu^-n with mu + 1/mu = x, and
the indices n with |y_n| <= K form an explicitly bounded window. Walking each
region in Omega(K) over that window is therefore finite whenever Omega(K) is,
and a completed walk with K >= 2 and no trace in the real band certifies the
conditions. K is the smallest trace modulus at the sink, raised to the explore
cutoff when that is larger; a cutoff below 2 never certifies.

The search starts on the integer triangle (1/0, n/1, (n+1)/1) nearest the
sink, whose traces have closed forms, rather than twisting down from
(1/0, 0/1, 1/1) and losing digits to cancellation.
"""

from __future__ import annotations

import cmath
import enum
import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit, types
from numba.typed import Dict

from .farey import BASE_TRIPLE, FareyTriple, Slope, flip, slope
from .representation import FNPoint, psi_fn

# verdict codes, also used as raster shades
NOT_QF = 0
QF = 1
UNKNOWN = 2

# NotQF reasons
NO_REASON = 0
ELLIPTIC = 1
PARABOLIC = 2
# Unknown causes (diagnostic only)
U_SATURATED = 10
U_FLAT_REGION = 11
U_WINDOW = 12
U_BUDGET = 13
U_SLOPE = 14
U_UNCERTIFIED = 15

_SLOPE_GUARD = 2**30


class Verdict(enum.IntEnum):
    NOT_QF = NOT_QF
    QF = QF
    UNKNOWN = UNKNOWN

    @property
    def label(self) -> str:
        return {0: "NotQF", 1: "QF", 2: "Unknown"}[int(self)]


class Reason(str, enum.Enum):
    ELLIPTIC_TRACE = "EllipticTrace"
    REAL_INTERVAL = "RealInterval"
    EXHAUSTED_NODES = "ExhaustedNodes"


@dataclass(frozen=True)
class BqParams:
    explore_cutoff: float = 2.0 + 1e-6
    node_cap: int = 20000
    real_band_eps: float = 1e-7
    saturation: float = 1e150
    max_descent: int = 100000

    def __post_init__(self):
        for name in ("explore_cutoff", "node_cap", "real_band_eps", "saturation", "max_descent"):
            if not getattr(self, name) > 0:
                raise ValueError(f"BqParams.{name} must be positive")


@dataclass(frozen=True)
class BqVerdict:
    verdict: Verdict
    witness: Slope | None = None
    reason: Reason | None = None
    nodes: int = 0

    @property
    def is_qf(self) -> bool:
        return self.verdict == Verdict.QF


@dataclass(frozen=True)
class MarkovState:
    triple: FareyTriple
    traces: tuple[complex, complex, complex] = field(default=(0j, 0j, 0j))

    @property
    def max_modulus(self) -> float:
        return max(abs(t) for t in self.traces)


def initial_state(pt: FNPoint) -> MarkovState:
    """Base triangle (1/0, 0/1, 1/1) carrying (x, y, z) = psi_fn(pt)."""
    x, y, z = psi_fn(pt)
    return MarkovState(BASE_TRIPLE, (x, y, z))


def flip_state(s: MarkovState, index: int) -> MarkovState:
    tr = list(s.traces)
    j, k = (i for i in range(3) if i != index)
    tr[index] = tr[j] * tr[k] - tr[index]
    return MarkovState(flip(s.triple, index), tuple(tr))


def descend_to_sink(s: MarkovState, max_steps: int = 100000) -> MarkovState:
    """Flip while some flip strictly lowers the largest trace modulus.

    Only a flip of the largest vertex can lower the maximum, so each step
    flips that vertex when the new triangle's maximum is smaller.
    """
    for _ in range(max_steps):
        mods = [abs(t) for t in s.traces]
        i = max(range(3), key=mods.__getitem__)
        cand = flip_state(s, i)
        if not cand.max_modulus < mods[i]:
            break
        s = cand
    return s


@njit(cache=True, nogil=True)
def _band(t, eps):
    tol = eps * (1.0 + abs(t))
    if abs(t.imag) > tol:
        return NO_REASON
    a = abs(t.real)
    if a < 2.0 - tol:
        return ELLIPTIC
    if a <= 2.0 + tol:
        return PARABOLIC
    return NO_REASON


@njit(cache=True, nogil=True)
def _key(p, q):
    if q < 0 or (q == 0 and p < 0):
        p = -p
        q = -q
    return p * 4294967296 + q


@njit(cache=True, nogil=True)
def _search(x0, y0, z0, n0, cutoff, node_cap, band_eps, saturation, max_descent):
    """Search from traces (x0, y0, z0) on the triangle (1/0, n0/1, (n0+1)/1).

    Returns (verdict, witness p, witness q, reason, nodes).
    """
    P = np.array([1, n0, n0 + 1], dtype=np.int64)
    Q = np.array([0, 1, 1], dtype=np.int64)
    T = np.empty(3, dtype=np.complex128)
    T[0] = x0
    T[1] = y0
    T[2] = z0
    for i in range(3):
        if not (np.isfinite(T[i].real) and np.isfinite(T[i].imag)) or abs(T[i]) > saturation:
            return UNKNOWN, 0, 0, U_SATURATED, 0
        r = _band(T[i], band_eps)
        if r != NO_REASON:
            return NOT_QF, P[i], Q[i], r, 0

    # descent toward a sink
    steps = 0
    while steps < max_descent:
        im = 0
        for i in range(1, 3):
            if abs(T[i]) > abs(T[im]):
                im = i
        j = (im + 1) % 3
        k = (im + 2) % 3
        new = T[j] * T[k] - T[im]
        newmax = max(abs(new), abs(T[j]), abs(T[k]))
        if not newmax < abs(T[im]):
            break
        pa = P[j] + P[k]
        qa = Q[j] + Q[k]
        if _key(pa, qa) == _key(P[im], Q[im]):
            pa = P[j] - P[k]
            qa = Q[j] - Q[k]
        P[im] = pa
        Q[im] = qa
        T[im] = new
        steps += 1
        r = _band(new, band_eps)
        if r != NO_REASON:
            return NOT_QF, pa, qa, r, steps

    m0 = min(abs(T[0]), abs(T[1]), abs(T[2]))
    K = max(cutoff, m0)
    # the escaping-edge argument needs the user's cutoff itself to reach 2;
    # a smaller cutoff still explores Omega(K) but can never certify QF
    certify = cutoff >= 2.0
    Kb = K * (1.0 + 1e-9)

    cap = node_cap + 3
    RP = np.empty(cap, dtype=np.int64)
    RQ = np.empty(cap, dtype=np.int64)
    RT = np.empty(cap, dtype=np.complex128)
    AP = np.empty(cap, dtype=np.int64)  # two consecutive neighbours
    AQ = np.empty(cap, dtype=np.int64)
    AT = np.empty(cap, dtype=np.complex128)
    BP = np.empty(cap, dtype=np.int64)
    BQ = np.empty(cap, dtype=np.int64)
    BT = np.empty(cap, dtype=np.complex128)
    nreg = 0
    seen = Dict.empty(key_type=types.int64, value_type=types.int64)
    heap = [(0.0, np.int64(0))]
    heap.pop()

    for i in range(3):
        seen[_key(P[i], Q[i])] = 1
    for i in range(3):
        if abs(T[i]) <= K:
            j = (i + 1) % 3
            k = (i + 2) % 3
            RP[nreg] = P[i]
            RQ[nreg] = Q[i]
            RT[nreg] = T[i]
            AP[nreg] = P[j]
            AQ[nreg] = Q[j]
            AT[nreg] = T[j]
            BP[nreg] = P[k]
            BQ[nreg] = Q[k]
            BT[nreg] = T[k]
            heapq.heappush(heap, (abs(T[i]), np.int64(nreg)))
            nreg += 1

    nodes = steps
    budget = node_cap
    while len(heap) > 0:
        item = heapq.heappop(heap)
        r_id = item[1]
        xp = RP[r_id]
        xq = RQ[r_id]
        x = RT[r_id]
        y0p = AP[r_id]
        y0q = AQ[r_id]
        y0 = AT[r_id]
        y1p = BP[r_id]
        y1q = BQ[r_id]
        y1 = BT[r_id]
        # orient so that Y1 = Y0 + D with D = +-X
        dp = y1p - y0p
        dq = y1q - y0q
        if not ((dp == xp and dq == xq) or (dp == -xp and dq == -xq)):
            y0p = -y0p
            y0q = -y0q
            dp = y1p - y0p
            dq = y1q - y0q

        s = np.sqrt(x * x - 4.0)
        mu = 0.5 * (x + s)
        if abs(mu) < 1.0:
            mu = 0.5 * (x - s)
        rr = abs(mu)
        if not rr > 1.0 + 1e-12:
            return UNKNOWN, 0, 0, U_FLAT_REGION, nodes
        inv = 1.0 / mu
        den = mu - inv
        A = (y1 - y0 * inv) / den
        B = (y0 * mu - y1) / den
        lr = math.log(rr)
        absA = abs(A)
        absB = abs(B)
        # |y_n| >= |A| rr^n - |B| for n >= 0 and |y_-n| >= |B| rr^n - |A|
        big = float(budget + 4)
        fnf = math.floor(math.log((Kb + absB) / absA) / lr) + 1.0 if absA > 0.0 else big
        fnb = math.floor(math.log((Kb + absA) / absB) / lr) + 1.0 if absB > 0.0 else big
        if fnf >= big or fnb >= big:
            return UNKNOWN, 0, 0, U_WINDOW, nodes
        nf = max(int(fnf), 2)
        nb = max(int(fnb), 1)
        work = (nf - 2) + (nb - 1)
        if nodes + work > budget:
            return UNKNOWN, 0, 0, U_BUDGET, nodes
        nodes += work

        # forward n = 2 .. nf-1; backward n = -1 .. -(nb-1)
        for direction in range(2):
            if direction == 0:
                prev = y0
                cur = y1
                cp = y1p
                cq = y1q
                count = nf - 2
                sp = dp
                sq = dq
            else:
                prev = y1
                cur = y0
                cp = y0p
                cq = y0q
                count = nb - 1
                sp = -dp
                sq = -dq
            for _ in range(count):
                nxt = x * cur - prev
                np_ = cp + sp
                nq_ = cq + sq
                if abs(nxt) <= K:
                    if abs(np_) > _SLOPE_GUARD or abs(nq_) > _SLOPE_GUARD:
                        return UNKNOWN, 0, 0, U_SLOPE, nodes
                    key = _key(np_, nq_)
                    if key not in seen:
                        seen[key] = 1
                        r = _band(nxt, band_eps)
                        if r != NO_REASON:
                            return NOT_QF, np_, nq_, r, nodes
                        if nreg >= cap:
                            return UNKNOWN, 0, 0, U_BUDGET, nodes
                        RP[nreg] = np_
                        RQ[nreg] = nq_
                        RT[nreg] = nxt
                        AP[nreg] = xp
                        AQ[nreg] = xq
                        AT[nreg] = x
                        BP[nreg] = cp
                        BQ[nreg] = cq
                        BT[nreg] = cur
                        heapq.heappush(heap, (abs(nxt), np.int64(nreg)))
                        nreg += 1
                prev = cur
                cur = nxt
                cp = np_
                cq = nq_
    if certify:
        return QF, 0, 0, NO_REASON, nodes
    return UNKNOWN, 0, 0, U_UNCERTIFIED, nodes


@njit(cache=True, nogil=True)
def classify_row(x, y, z, n0, out, cutoff, node_cap, band_eps, saturation, max_descent):
    """Verdict codes for arrays of start triangles, written into ``out``."""
    for j in range(x.shape[0]):
        out[j] = _search(x[j], y[j], z[j], n0[j], cutoff, node_cap, band_eps, saturation, max_descent)[0]


def start_index(lam: complex, tau: complex) -> int:
    """n with Re(tau + n lam) <= 0 < Re(tau + (n+1) lam), or 0 when Re lam <= 0."""
    lr = complex(lam).real
    if not lr > 0:
        return 0
    return math.floor(-complex(tau).real / lr)


def start_triple(lam: complex, tau: complex, n: int) -> tuple[complex, complex, complex]:
    """Closed-form traces of (1/0, n/1, (n+1)/1).

    Starting next to the sink avoids the cancellation that twisting down
    from the base triangle incurs when |Re tau| is large.
    """
    lam, tau = complex(lam), complex(tau)
    th = cmath.tanh(lam / 2)
    x = 2 * cmath.cosh(lam / 2)
    y = 2 * cmath.cosh((tau + n * lam) / 2) / th
    z = 2 * cmath.cosh((tau + (n + 1) * lam) / 2) / th
    return x, y, z


def search_traces(x: complex, y: complex, z: complex, params: BqParams = BqParams(), jit: bool = True, n0: int = 0):
    """Raw search on a Markov triple sitting on (1/0, n0/1, (n0+1)/1)."""
    fn = _search if jit else _search.py_func
    return fn(
        complex(x),
        complex(y),
        complex(z),
        int(n0),
        float(params.explore_cutoff),
        int(params.node_cap),
        float(params.real_band_eps),
        float(params.saturation),
        int(params.max_descent),
    )


def _to_verdict(raw) -> BqVerdict:
    code, wp, wq, reason, nodes = raw
    if code == NOT_QF:
        r = Reason.ELLIPTIC_TRACE if reason == ELLIPTIC else Reason.REAL_INTERVAL
        return BqVerdict(Verdict.NOT_QF, slope(int(wp), int(wq)), r, int(nodes))
    if code == QF:
        return BqVerdict(Verdict.QF, nodes=int(nodes))
    return BqVerdict(Verdict.UNKNOWN, reason=Reason.EXHAUSTED_NODES, nodes=int(nodes))


def bq_test(pt: FNPoint, params: BqParams = BqParams(), jit: bool = True) -> BqVerdict:
    n = start_index(pt.lam, pt.tau)
    return _to_verdict(search_traces(*start_triple(pt.lam, pt.tau, n), params, jit, n))


def verdict_code(pt: FNPoint, params: BqParams = BqParams()) -> int:
    return int(bq_test(pt, params).verdict)
