"""Slice rasters, limit-set point clouds and binary PNM output."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bq import NOT_QF, QF, UNKNOWN
from .mobius import Mat2C
from .representation import FNPoint, matrices
from .slicescan import RaySegment, SliceScan, pp_bound

# shade code -> gray level / colour
GRAY_PALETTE = {NOT_QF: 255, QF: 80, UNKNOWN: 176}
COLOR_PALETTE = {NOT_QF: (255, 255, 255), QF: (70, 110, 170), UNKNOWN: (200, 200, 200)}
PP_COLOR = (220, 40, 40)
RAY_COLOR = (250, 170, 0)

MAX_WORD_LEN = 20
DEDUP_GRID = 1e-6


@dataclass(frozen=True, eq=False)
class RasterImage:
    width: int
    height: int
    pixels: np.ndarray  # uint8, (height, width) or (height, width, 3); row 0 is the top

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"invalid image size {self.width}x{self.height}")
        if self.pixels.shape[:2] != (self.height, self.width):
            raise ValueError("pixel array does not match image size")

    @property
    def is_color(self) -> bool:
        return self.pixels.ndim == 3


def _grid_to_image(s: SliceScan, palette: dict) -> np.ndarray:
    cells = s.cells[::-1]  # top row = im_max
    sample = next(iter(palette.values()))
    if isinstance(sample, tuple):
        lut = np.zeros((256, 3), dtype=np.uint8)
        for k, v in palette.items():
            lut[k] = v
    else:
        lut = np.zeros(256, dtype=np.uint8)
        for k, v in palette.items():
            lut[k] = v
    return lut[cells]


def _to_pixel(s: SliceScan, tau: complex) -> tuple[float, float]:
    w = s.window
    col = (tau.real - w.re_min) / w.dx - 0.5
    row = (w.im_max - tau.imag) / w.dy - 0.5
    return row, col


def _draw_polyline(img: np.ndarray, pts: list[tuple[float, float]], color) -> None:
    from skimage.draw import line

    h, w = img.shape[:2]

    def put(r, c):
        keep = (r >= 0) & (r < h) & (c >= 0) & (c < w)
        img[r[keep], c[keep]] = color

    rc = [(int(round(r)), int(round(c))) for r, c in pts]
    if len(rc) == 1:
        put(np.array([rc[0][0]]), np.array([rc[0][1]]))
    for (r0, c0), (r1, c1) in zip(rc, rc[1:]):
        rr, cc = line(r0, c0, r1, c1)
        put(rr, cc)


def rasterize(
    s: SliceScan,
    palette: dict | None = None,
    pp_overlay: bool = False,
    rays: list[RaySegment] | None = None,
) -> RasterImage:
    """One pixel per cell. Overlays force a colour image."""
    color = pp_overlay or bool(rays)
    if palette is None:
        palette = COLOR_PALETTE if color else GRAY_PALETTE
    img = _grid_to_image(s, palette)
    if color and img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    if pp_overlay:
        b = pp_bound(s.l)
        w = s.window
        for im in (b, -b):
            if w.im_min <= im <= w.im_max:
                r, _ = _to_pixel(s, complex(0, im))
                _draw_polyline(img, [(r, 0), (r, w.nx - 1)], PP_COLOR)
    for seg in rays or []:
        _draw_polyline(img, [_to_pixel(s, t) for t in seg.polyline], RAY_COLOR)
    img = np.ascontiguousarray(img, dtype=np.uint8)
    return RasterImage(s.window.nx, s.window.ny, img)


def pnm_bytes(img: RasterImage) -> bytes:
    magic = b"P6" if img.is_color else b"P5"
    header = magic + f"\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(img.pixels, dtype=np.uint8).tobytes()


def write_pnm(img: RasterImage, path) -> None:
    path = Path(path)
    try:
        path.write_bytes(pnm_bytes(img))
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def read_pnm(path) -> RasterImage:
    data = Path(path).read_bytes()
    magic, dims, maxval, rest = data.split(b"\n", 3)
    w, h = (int(v) for v in dims.split())
    if maxval != b"255" or magic not in (b"P5", b"P6"):
        raise ValueError(f"unsupported PNM file {path}")
    shape = (h, w, 3) if magic == b"P6" else (h, w)
    return RasterImage(w, h, np.frombuffer(rest, dtype=np.uint8).reshape(shape).copy())


# -- limit sets -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray  # complex128; inf + 0j stands for the point at infinity
    wordlen: np.ndarray  # int

    def __len__(self):
        return len(self.points)

    def finite(self) -> "PointCloud":
        keep = np.isfinite(self.points)
        return PointCloud(self.points[keep], self.wordlen[keep])


def _as_array(m: Mat2C) -> np.ndarray:
    return np.array([[m.a, m.b], [m.c, m.d]], dtype=complex)


def attracting_fixed_point(m: Mat2C) -> np.ndarray:
    """Projective coordinates (u, v) of the attracting fixed point."""
    vals, vecs = np.linalg.eig(_as_array(m))
    v = vecs[:, int(np.argmax(np.abs(vals)))]
    return v / v[np.argmax(np.abs(v))]


def _proj_to_complex(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.full(u.shape, complex(math.inf, 0.0))
    fin = np.abs(v) > 1e-300 * np.abs(u)
    out[fin] = u[fin] / v[fin]
    return out


def _grid_keys(z: np.ndarray) -> np.ndarray:
    """Integer keys on the DEDUP_GRID lattice (row per point); infinity gets a sentinel."""
    keys = np.empty((len(z), 2), dtype=np.float64)
    fin = np.isfinite(z)
    keys[fin, 0] = np.round(z[fin].real / DEDUP_GRID)
    keys[fin, 1] = np.round(z[fin].imag / DEDUP_GRID)
    keys[~fin] = np.inf
    return keys


def limit_set(pt: FNPoint, max_word_len: int) -> PointCloud:
    """Orbit of the attracting fixed points of rho(a) and rho(b) under reduced words.

    Words grow on the left, so each level applies one generator to the
    previous level's points, skipping the inverse of the word's first letter.
    Points are deduplicated on a 1e-6 grid and tagged with the shortest word
    length reaching them; the frontier is deduplicated on (grid cell, first
    letter), which is exact up to that grid.
    """
    if not 0 <= max_word_len <= MAX_WORD_LEN:
        raise ValueError(f"max_word_len must be in [0, {MAX_WORD_LEN}]")
    rep = matrices(pt)
    gens = [rep.A, rep.A.inverse(), rep.B, rep.B.inverse()]
    G = np.array([_as_array(g) for g in gens])
    inverse_of = np.array([1, 0, 3, 2])

    seeds = np.array([attracting_fixed_point(rep.A), attracting_fixed_point(rep.B)])
    u, v = seeds[:, 0], seeds[:, 1]
    first = np.full(2, -1)  # -1: empty word

    z = _proj_to_complex(u, v)
    all_z = [z]
    all_len = [np.zeros(len(z), dtype=np.int64)]
    for n in range(1, max_word_len + 1):
        nu, nv, nf = [], [], []
        for g in range(4):
            keep = first != inverse_of[g]
            a, b, c, d = G[g, 0, 0], G[g, 0, 1], G[g, 1, 0], G[g, 1, 1]
            uu = a * u[keep] + b * v[keep]
            vv = c * u[keep] + d * v[keep]
            nu.append(uu)
            nv.append(vv)
            nf.append(np.full(len(uu), g))
        u, v, first = np.concatenate(nu), np.concatenate(nv), np.concatenate(nf)
        scale = np.maximum(np.abs(u), np.abs(v))
        u, v = u / scale, v / scale
        z = _proj_to_complex(u, v)
        # frontier dedup on (cell, first letter)
        keys = np.column_stack([_grid_keys(z), first])
        _, idx = np.unique(keys, axis=0, return_index=True)
        idx.sort()
        u, v, first, z = u[idx], v[idx], first[idx], z[idx]
        all_z.append(z)
        all_len.append(np.full(len(z), n, dtype=np.int64))

    z = np.concatenate(all_z)
    lens = np.concatenate(all_len)
    # global dedup keeping the shortest word: stable sort by length first
    order = np.argsort(lens, kind="stable")
    z, lens = z[order], lens[order]
    _, idx = np.unique(_grid_keys(z), axis=0, return_index=True)
    z, lens = z[idx], lens[idx]
    re = np.where(np.isfinite(z), z.real, np.inf)
    im = np.where(np.isfinite(z), z.imag, 0.0)
    order = np.lexsort((im, re))
    return PointCloud(z[order], lens[order])


def circle_fit_residual(points: np.ndarray) -> float:
    """RMS distance, on the Riemann sphere, from the best-fitting plane section.

    Circles and lines in the plane are exactly the plane sections of the
    sphere, so this treats both alike and copes with the point at infinity.
    Points are first scaled by their median modulus.
    """
    z = np.asarray(points, dtype=complex)
    fin = np.isfinite(z)
    s = np.median(np.abs(z[fin])) if fin.any() else 1.0
    s = s if s > 0 else 1.0
    w = z[fin] / s
    r2 = np.abs(w) ** 2
    X = np.column_stack([2 * w.real, 2 * w.imag, r2 - 1]) / (1 + r2)[:, None]
    n_inf = int(np.count_nonzero(~fin))
    if n_inf:
        X = np.vstack([X, np.tile([0.0, 0.0, 1.0], (n_inf, 1))])
    if len(X) < 4:
        return 0.0
    c = X - X.mean(axis=0)
    sv = np.linalg.svd(c, compute_uv=False)
    return float(sv[-1] / math.sqrt(len(X)))


def realness(points: np.ndarray) -> float:
    """max |Im z| / (1 + |z|) over finite points."""
    z = np.asarray(points, dtype=complex)
    z = z[np.isfinite(z)]
    if z.size == 0:
        return 0.0
    return float(np.max(np.abs(z.imag) / (1 + np.abs(z))))


def write_point_csv(pc: PointCloud, path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["re", "im", "wordlen"])
            for z, n in zip(pc.points, pc.wordlen):
                if np.isfinite(z):
                    wr.writerow([repr(float(z.real)), repr(float(z.imag)), int(n)])
                else:
                    wr.writerow(["inf", "0.0", int(n)])
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def default_bounds(pc: PointCloud, margin: float = 0.05) -> tuple[float, float, float, float]:
    z = pc.finite().points
    if z.size == 0:
        return (-1.0, 1.0, -1.0, 1.0)
    lo_r, hi_r = np.quantile(z.real, [0.01, 0.99])
    lo_i, hi_i = np.quantile(z.imag, [0.01, 0.99])
    span = max(hi_r - lo_r, hi_i - lo_i, 1e-9)
    cr, ci = (lo_r + hi_r) / 2, (lo_i + hi_i) / 2
    half = span * (0.5 + margin)
    return (cr - half, cr + half, ci - half, ci + half)


def rasterize_points(pc: PointCloud, width: int, height: int, bounds=None) -> RasterImage:
    """Black points on white; the point at infinity is dropped."""
    if width < 1 or height < 1:
        raise ValueError(f"invalid image size {width}x{height}")
    re0, re1, im0, im1 = bounds if bounds is not None else default_bounds(pc)
    img = np.full((height, width), 255, dtype=np.uint8)
    z = pc.finite().points
    col = np.floor((z.real - re0) / (re1 - re0) * width).astype(np.int64)
    row = np.floor((im1 - z.imag) / (im1 - im0) * height).astype(np.int64)
    keep = (col >= 0) & (col < width) & (row >= 0) & (row < height)
    img[row[keep], col[keep]] = 0
    return RasterImage(width, height, img)
