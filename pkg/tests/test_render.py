import hashlib
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfslice.bq import QF
from qfslice.farey import Slope
from qfslice.render import (
    GRAY_PALETTE,
    RasterImage,
    attracting_fixed_point,
    circle_fit_residual,
    limit_set,
    pnm_bytes,
    rasterize,
    rasterize_points,
    read_pnm,
    realness,
    write_pnm,
    write_point_csv,
)
from qfslice.representation import DegenerateLength, FNPoint, matrices
from qfslice.slicescan import Window, build_scan, pleating_ray, scan

GOLDEN = Path(__file__).parent / "golden" / "scan_l4.13_8x8.pgm"
GOLDEN_SHA256 = "b19fb59245bc210a8cfe1eb443e7fccd835faeed38dd1adb7be825db1cc7992b"
L = 4.13
GOLDEN_WINDOW = Window(-L / 8, 15 * L / 8, nx=8, ny=8)


def test_one_pixel_pgm(tmp_path):
    img = RasterImage(1, 1, np.array([[255]], dtype=np.uint8))
    p = tmp_path / "w.pgm"
    write_pnm(img, p)
    assert p.read_bytes() == b"P5\n1 1\n255\n\xff"


def test_ppm_header():
    img = RasterImage(2, 1, np.zeros((1, 2, 3), dtype=np.uint8))
    assert pnm_bytes(img) == b"P6\n2 1\n255\n" + bytes(6)


def test_zero_size_rejected():
    with pytest.raises(ValueError):
        RasterImage(0, 1, np.zeros((1, 0), dtype=np.uint8))
    with pytest.raises(ValueError):
        rasterize_points(limit_set(FNPoint(2.0, 0.1), 1), 0, 4)


def test_write_error_has_path(tmp_path):
    img = RasterImage(1, 1, np.zeros((1, 1), dtype=np.uint8))
    bad = tmp_path / "missing" / "x.pgm"
    with pytest.raises(OSError, match="missing"):
        write_pnm(img, bad)


@given(st.integers(1, 9), st.integers(1, 9), st.booleans(), st.integers(0, 2**32 - 1))
def test_pnm_roundtrip(w, h, color, seed):
    import tempfile

    shape = (h, w, 3) if color else (h, w)
    px = np.random.default_rng(seed).integers(0, 256, shape, dtype=np.uint8)
    img = RasterImage(w, h, px)
    with tempfile.TemporaryDirectory() as d:
        p = Path(d) / "x.pnm"
        write_pnm(img, p)
        back = read_pnm(p)
    assert back.is_color == color
    assert np.array_equal(back.pixels, px)


def test_all_qf_uniform():
    s = build_scan(1.0, Window(-1, 2, nx=5, ny=4), np.full((4, 5), QF))
    img = rasterize(s)
    assert np.all(img.pixels == GRAY_PALETTE[QF])
    assert (img.width, img.height) == (5, 4)


def test_top_row_is_im_max():
    cells = np.zeros((3, 2), dtype=np.uint8)
    cells[2, :] = QF  # highest Im
    img = rasterize(build_scan(1.0, Window(-1, 2, nx=2, ny=3), cells))
    assert np.all(img.pixels[0] == GRAY_PALETTE[QF])
    assert np.all(img.pixels[1:] == GRAY_PALETTE[0])


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_golden_scan(workers, tmp_path):
    s = scan(L, GOLDEN_WINDOW, workers=workers)
    p = tmp_path / "g.pgm"
    write_pnm(rasterize(s), p)
    data = p.read_bytes()
    assert data == GOLDEN.read_bytes()
    assert hashlib.sha256(data).hexdigest() == GOLDEN_SHA256


def test_overlays_make_color():
    w = Window(-2, 4, nx=30, ny=24)
    s = scan(2.0, w)
    rays = pleating_ray(2.0, Slope(0, 1), w, scan_=s)
    img = rasterize(s, pp_overlay=True, rays=rays)
    assert img.is_color
    assert pnm_bytes(img).startswith(b"P6\n30 24\n255\n")
    assert pnm_bytes(img) == pnm_bytes(rasterize(s, pp_overlay=True, rays=rays))


# -- limit sets -----------------------------------------------------------


def test_seed_fixed_points():
    pt = FNPoint(6.0, 0.5)
    pc = limit_set(pt, 0)
    assert len(pc) == 2
    rep = matrices(pt)
    assert any(math.isinf(z.real) for z in pc.points)  # rho(a) is upper triangular
    u, v = attracting_fixed_point(rep.B)
    zb = u / v
    assert min(abs(z - zb) for z in pc.points if np.isfinite(z)) < 1e-9


def test_fuchsian_limit_set_is_real():
    pc = limit_set(FNPoint(6.0, 0.5), 12)
    assert realness(pc.points) <= 1e-5
    assert circle_fit_residual(pc.points) <= 1e-5


def test_strip_edge_limit_set_on_a_circle():
    pc = limit_set(FNPoint(3.0, complex(0.4, math.pi)), 10)
    assert circle_fit_residual(pc.points) <= 1e-5


def test_quasi_fuchsian_limit_set_not_circle():
    pc = limit_set(FNPoint(6.0, 0.4 + 0.4j), 10)
    assert circle_fit_residual(pc.points) > 1e-3


def test_point_count_monotone():
    counts = [len(limit_set(FNPoint(3.0, 0.2 + 0.3j), k)) for k in range(9)]
    assert counts[0] == 2
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_sorted_and_deterministic():
    a = limit_set(FNPoint(3.0, 0.2 + 0.3j), 6)
    b = limit_set(FNPoint(3.0, 0.2 + 0.3j), 6)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.wordlen, b.wordlen)
    re = np.where(np.isfinite(a.points), a.points.real, np.inf)
    assert np.all(np.diff(re) >= 0)


def test_limit_set_errors():
    with pytest.raises(ValueError):
        limit_set(FNPoint(2.0, 0.1), 21)
    with pytest.raises(DegenerateLength):
        limit_set(FNPoint(0j, 0.1), 3)


def test_circle_fit_on_synthetic_sets():
    t = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    assert circle_fit_residual(3 + 2j + 5 * np.exp(1j * t)) < 1e-12
    assert circle_fit_residual(np.append(np.linspace(-5, 5, 50) * (1 + 1j), np.inf)) < 1e-12
    rng = np.random.default_rng(0)
    assert circle_fit_residual(rng.normal(size=200) + 1j * rng.normal(size=200)) > 0.05


def test_point_csv(tmp_path):
    pc = limit_set(FNPoint(2.0, 0.1), 2)
    p = tmp_path / "pc.csv"
    write_point_csv(pc, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "re,im,wordlen"
    assert len(lines) == len(pc) + 1
    assert lines[-1].startswith("inf,")


def test_point_raster():
    pc = limit_set(FNPoint(6.0, 0.4 + 0.4j), 8)
    img = rasterize_points(pc, 64, 48)
    assert img.pixels.shape == (48, 64)
    assert (img.pixels == 0).any()
