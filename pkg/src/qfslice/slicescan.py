"""Classified grids over the tau-strip at fixed real length l.

Cells are sampled at their centres. Grid row 0 is the bottom row (Im tau
closest to im_min); rasterizing flips it so the top image row is im_max.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bq
from .bq import QF, UNKNOWN, BqParams, Verdict, bq_test
from .farey import Slope, slope
from .mobius import IsomClass, classify
from .representation import FNPoint
from .traces import eval_poly, trace_poly


class WindowTooNarrow(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    re_min: float
    re_max: float
    im_min: float = -math.pi
    im_max: float = math.pi
    nx: int = 100
    ny: int = 100

    def __post_init__(self):
        if not self.re_min < self.re_max:
            raise ValueError("need re_min < re_max")
        if not -math.pi <= self.im_min < self.im_max <= math.pi:
            raise ValueError("need -pi <= im_min < im_max <= pi")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("nx and ny must be positive")

    @property
    def dx(self) -> float:
        return (self.re_max - self.re_min) / self.nx

    @property
    def dy(self) -> float:
        return (self.im_max - self.im_min) / self.ny

    def re_centers(self) -> np.ndarray:
        return self.re_min + (np.arange(self.nx) + 0.5) * self.dx

    def im_centers(self) -> np.ndarray:
        return self.im_min + (np.arange(self.ny) + 0.5) * self.dy

    def centers(self) -> np.ndarray:
        """Complex cell centres, shape (ny, nx), row 0 at the bottom."""
        return self.re_centers()[None, :] + 1j * self.im_centers()[:, None]

    def cell_of(self, tau: complex) -> tuple[int, int] | None:
        i = math.floor((tau.imag - self.im_min) / self.dy)
        j = math.floor((tau.real - self.re_min) / self.dx)
        if 0 <= i < self.ny and 0 <= j < self.nx:
            return i, j
        return None

    def shifted(self, dre: float) -> "Window":
        return Window(self.re_min + dre, self.re_max + dre, self.im_min, self.im_max, self.nx, self.ny)


@dataclass
class SliceScan:
    l: float
    window: Window
    cells: np.ndarray  # uint8 verdict codes, shape (ny, nx)
    labels: np.ndarray  # int32, -1 off QF
    standard_id: int | None
    params: BqParams = field(default_factory=BqParams)

    def histogram(self) -> dict[str, int]:
        return {v.label: int(np.count_nonzero(self.cells == v)) for v in Verdict}


def pp_bound(l: float) -> float:
    """Half-width 2 arccos(tanh(l/2)) of the strip known to lie in QF(l)."""
    if not l > 0:
        raise ValueError("l must be positive")
    return 2 * math.acos(math.tanh(l / 2))


def elliptic_bands(l: float) -> tuple[float, float]:
    """Lower ends of the b-ranges where tr_{-n/1} at Re tau = nl (first value)
    and tr_{-n-1/2} at Re tau = (n + 1/2)l (second value) are elliptic."""
    if not l > 0:
        raise ValueError("l must be positive")
    th = math.tanh(l / 2)
    return 2 * math.acos(th), math.acos(th * th - 1 / math.cosh(l / 2))


def _start_grid(l: float, taus: np.ndarray):
    """Vectorised bq.start_index / bq.start_triple at lambda = l."""
    lam = complex(l)
    n = np.floor(-taus.real / l).astype(np.int64)
    th = np.tanh(lam / 2)
    x = np.full(taus.shape, 2 * np.cosh(lam / 2), dtype=complex)
    y = 2 * np.cosh((taus + n * lam) / 2) / th
    z = 2 * np.cosh((taus + (n + 1) * lam) / 2) / th
    return x, y, z, n


def classify_points(l: float, taus: np.ndarray, params: BqParams = BqParams(), workers: int = 1) -> np.ndarray:
    """Verdict codes for an array of tau values at lambda = l (same shape)."""
    taus = np.asarray(taus, dtype=complex)
    shape = taus.shape
    if taus.ndim != 2:
        taus = taus.reshape(1, -1)
    x, y, z, n0 = _start_grid(l, taus)
    out = np.empty(taus.shape, dtype=np.uint8)
    args = (
        float(params.explore_cutoff),
        int(params.node_cap),
        float(params.real_band_eps),
        float(params.saturation),
        int(params.max_descent),
    )

    def row(i):
        bq.classify_row(x[i], y[i], z[i], n0[i], out[i], *args)

    if workers <= 1:
        for i in range(taus.shape[0]):
            row(i)
    else:
        # rows write disjoint slices of `out`, so the merge is positional
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(row, range(taus.shape[0])))
    return out.reshape(shape)


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller root wins so labels do not depend on merge order
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def label_components(mask: np.ndarray, bridge: np.ndarray | None = None) -> np.ndarray:
    """4-connected labels of ``mask`` numbered 0, 1, ... in raster order.

    Cells in ``bridge`` may connect mask cells but get no label themselves.
    """
    ny, nx = mask.shape
    passable = mask if bridge is None else (mask | bridge)
    uf = UnionFind(ny * nx)
    ii, jj = np.nonzero(passable[:, :-1] & passable[:, 1:])
    for i, j in zip(ii.tolist(), jj.tolist()):
        uf.union(i * nx + j, i * nx + j + 1)
    ii, jj = np.nonzero(passable[:-1, :] & passable[1:, :])
    for i, j in zip(ii.tolist(), jj.tolist()):
        uf.union(i * nx + j, (i + 1) * nx + j)
    labels = np.full(mask.shape, -1, dtype=np.int32)
    ids: dict[int, int] = {}
    for i, j in zip(*np.nonzero(mask)):
        r = uf.find(int(i) * nx + int(j))
        labels[i, j] = ids.setdefault(r, len(ids))
    return labels


def _standard_id(labels: np.ndarray, w: Window) -> int | None:
    near_axis = np.abs(w.im_centers()) < w.dy
    cand = labels[near_axis, :]
    cand = cand[cand >= 0]
    if cand.size == 0:
        return None
    ids, counts = np.unique(cand, return_counts=True)
    return int(ids[np.argmax(counts)])


def build_scan(l: float, w: Window, cells: np.ndarray, params: BqParams = BqParams(), unknown_bridges: bool = False) -> SliceScan:
    cells = np.asarray(cells, dtype=np.uint8)
    bridge = cells == UNKNOWN if unknown_bridges else None
    labels = label_components(cells == QF, bridge)
    return SliceScan(l, w, cells, labels, _standard_id(labels, w), params)


def scan(l: float, w: Window, p: BqParams = BqParams(), workers: int = 1, unknown_bridges: bool = False) -> SliceScan:
    """Classify every cell centre of ``w`` and label the QF components.

    Unknown cells separate components unless ``unknown_bridges`` is set, in
    which case they may join QF cells without being labelled.
    """
    cells = classify_points(l, w.centers(), p, workers)
    return build_scan(l, w, cells, p, unknown_bridges)


@dataclass(frozen=True)
class Component:
    label: int
    cells: int
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    truncated: bool
    counted: bool

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "cells": self.cells,
            "bbox": [self.re_min, self.re_max, self.im_min, self.im_max],
            "truncated": self.truncated,
            "counted": self.counted,
        }


@dataclass(frozen=True)
class ComponentReport:
    standard: bool
    nonstandard_count: int
    truncated: int
    components: list[Component]

    def as_dict(self) -> dict:
        return {
            "standard": self.standard,
            "nonstandard_count": self.nonstandard_count,
            "truncated": self.truncated,
            "components": [c.as_dict() for c in self.components],
        }


def count_components(s: SliceScan) -> ComponentReport:
    """Non-standard components counted once per twist period.

    A component counts when its leftmost cell centre has Re tau in [0, l)
    and it does not touch the left or right edge of the window.
    """
    w, l = s.window, s.l
    if w.re_min > -l / 4 or w.re_max < 5 * l / 4:
        raise WindowTooNarrow(f"window [{w.re_min}, {w.re_max}] must cover [{-l / 4}, {5 * l / 4}]")
    re_c, im_c = w.re_centers(), w.im_centers()
    comps = []
    count = truncated = 0
    n_labels = int(s.labels.max()) + 1 if s.labels.size else 0
    for lab in range(n_labels):
        if lab == s.standard_id:
            continue
        ii, jj = np.nonzero(s.labels == lab)
        touches = jj.min() == 0 or jj.max() == w.nx - 1
        left = re_c[jj.min()]
        counted = not touches and 0 <= left < l
        truncated += bool(touches)
        count += counted
        comps.append(
            Component(
                lab,
                int(ii.size),
                float(re_c[jj.min()]),
                float(re_c[jj.max()]),
                float(im_c[ii.min()]),
                float(im_c[ii.max()]),
                bool(touches),
                bool(counted),
            )
        )
    return ComponentReport(s.standard_id is not None, int(count), int(truncated), comps)


# -- verification ---------------------------------------------------------


def pp_samples(l: float, n: int, rng: np.random.Generator) -> np.ndarray:
    b = 0.95 * pp_bound(l)
    return rng.uniform(-l, 2 * l, n) + 1j * rng.uniform(-b, b, n)


def band_samples(l: float, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Points n*l + b i with n in {0, 1} and b in (1.05 pp_bound, 0.95 pi)."""
    lo = 1.05 * pp_bound(l)
    ns = rng.integers(0, 2, n)
    bs = rng.uniform(lo, 0.95 * math.pi, n)
    return ns * l + 1j * bs, ns


def strip_samples(l: float, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-l, 2 * l, n) + 1j * rng.uniform(-math.pi, math.pi, n)


def cusp_trace_errors(l: float, ns=(0, 1, 2)) -> list[float]:
    """|tr_{-n/1}(l, nl + pp_bound(l) i) - 2|."""
    out = []
    for n in ns:
        tp = trace_poly(slope(-n, 1), complex(l))
        out.append(abs(eval_poly(tp, complex(n * l, pp_bound(l))) - 2))
    return out


def agreement(a: np.ndarray, b: np.ndarray) -> tuple[float, int]:
    """Fraction of equal verdicts over pairs where neither is Unknown."""
    keep = (a != UNKNOWN) & (b != UNKNOWN)
    n = int(np.count_nonzero(keep))
    if n == 0:
        return 1.0, 0
    return float(np.count_nonzero(a[keep] == b[keep])) / n, n


def verify(l: float, n_samples: int = 500, p: BqParams = BqParams(), seed: int = 0, workers: int = 1) -> dict:
    rng = np.random.default_rng(seed)
    pp = pp_samples(l, n_samples, rng)
    v_pp = classify_points(l, pp, p, workers)
    band, ns = band_samples(l, n_samples, rng)
    band_ok = 0
    for tau, n in zip(band, ns):
        v = bq_test(FNPoint(l, tau), p)
        band_ok += v.verdict == Verdict.NOT_QF and v.witness == slope(-int(n), 1)
    cusp = cusp_trace_errors(l)
    pts = strip_samples(l, n_samples, rng)
    v0 = classify_points(l, pts, p, workers)
    v_twist = classify_points(l, pts + l, p, workers)
    v_conj = classify_points(l, pts.conj(), p, workers)
    twist, n_twist = agreement(v0, v_twist)
    conj, n_conj = agreement(v0, v_conj)
    report = {
        "l": l,
        "n_samples": n_samples,
        "seed": seed,
        "pp_bound": pp_bound(l),
        "pp_qf_fraction": float(np.mean(v_pp == QF)),
        "pp_unknown": int(np.count_nonzero(v_pp == UNKNOWN)),
        "band_notqf_fraction": band_ok / n_samples,
        "cusp_trace_errors": cusp,
        "twist_agreement": twist,
        "twist_pairs": n_twist,
        "conj_agreement": conj,
        "conj_pairs": n_conj,
    }
    report["passed"] = verify_passed(report)
    return report


def verify_passed(r: dict) -> bool:
    return (
        r["pp_qf_fraction"] == 1.0
        and r["band_notqf_fraction"] == 1.0
        and max(r["cusp_trace_errors"]) <= 1e-9
        and r["twist_agreement"] == 1.0
        and r["conj_agreement"] == 1.0
    )


# -- pleating rays --------------------------------------------------------


@dataclass(frozen=True)
class RaySegment:
    slope: Slope
    side: int  # +1 for Im tau > 0, -1 below
    polyline: tuple[complex, ...]


RAY_TOL = 1e-6


def _refine_on_edge(f, a: complex, b: complex, fa: float, tol_fn, iters: int = 200) -> complex:
    """Bisection for Im f = 0 on the segment [a, b] given a sign change."""
    for _ in range(iters):
        m = 0.5 * (a + b)
        v = f(m)
        if tol_fn(v):
            return m
        if (v.imag > 0) == (fa > 0):
            a, fa = m, v.imag
        else:
            b = m
        if a == b:
            break
    return 0.5 * (a + b)


def pleating_ray(l: float, s: Slope, w: Window, p: BqParams = BqParams(), scan_: SliceScan | None = None) -> list[RaySegment]:
    """Pieces of the real locus of tr_s inside the QF cells of the window.

    Zero contours of Im tr_s(l, .) are traced by marching squares on the cell
    centres, every contour vertex is refined by bisection along its grid edge,
    and only vertices with a hyperbolic trace in a QF cell off the real axis
    are kept. Segments break wherever the filter fails.
    """
    from skimage.measure import find_contours

    if s.q < 1:
        raise ValueError("pleating rays are defined for slopes other than 1/0")
    if scan_ is None:
        scan_ = scan(l, w, p)
    tp = trace_poly(s, complex(l))
    centers = w.centers()
    vals = np.array([[eval_poly(tp, t) for t in row] for row in centers])
    im = vals.imag

    def f(t):
        return eval_poly(tp, t)

    def ok(v):
        return abs(v.imag) <= 1e-3 * RAY_TOL * (1 + abs(v))

    segments: list[RaySegment] = []
    for contour in find_contours(im, 0.0):
        current: list[complex] = []
        side = 0

        def flush():
            nonlocal current
            if len(current) >= 2:
                segments.append(RaySegment(s, side, tuple(current)))
            current = []

        for r, c in contour:
            ri, ci = int(math.floor(r)), int(math.floor(c))
            if float(r).is_integer():
                a_idx, b_idx = (int(r), ci), (int(r), min(ci + 1, w.nx - 1))
            else:
                a_idx, b_idx = (ri, int(c)), (min(ri + 1, w.ny - 1), int(c))
            a, b = centers[a_idx], centers[b_idx]
            fa, fb = im[a_idx], im[b_idx]
            if fa == 0:
                t = complex(a)
            elif fb == 0 or a_idx == b_idx:
                t = complex(b)
            else:
                t = _refine_on_edge(f, complex(a), complex(b), fa, ok)
            v = f(t)
            cell = w.cell_of(t)
            keep = (
                abs(t.imag) > 1e-9
                and abs(v.imag) <= RAY_TOL * (1 + abs(v))
                and classify(v) == IsomClass.HYPERBOLIC
                and cell is not None
                and scan_.cells[cell] == QF
            )
            this_side = 1 if t.imag > 0 else -1
            if not keep or (current and this_side != side):
                flush()
            if keep:
                side = this_side
                current.append(t)
        flush()
    return segments
