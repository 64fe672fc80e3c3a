"""Command line: ``qfslice {scan,components,ray,verify,limitset}``.

Exit codes: 0 success, 1 I/O failure, 2 invalid configuration, 3 failed
verification. Every command prints a JSON report on stdout that embeds the
package version, the resolved configuration, wall-clock time and, where a
scan is involved, the verdict histogram.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bq import BqParams
from .farey import parse_slope
from .representation import DegenerateLength, FNPoint
from .slicescan import (
    Window,
    WindowTooNarrow,
    count_components,
    pleating_ray,
    scan,
    verify,
)

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2, 3

_COMPLEX_RE = re.compile(
    r"^\s*([+-]?\s*(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*"
    r"(?:([+-])\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*[ij])?\s*$"
)


class ConfigError(ValueError):
    pass


def parse_complex(text: str) -> complex:
    """Parse ``x+yi`` with optional spaces: "0.4+0.4i", "-1 - 2i", "3", "+2i".

    ``j`` is accepted in place of ``i``. A lone imaginary part needs a sign
    or a leading real part, so "2i" is written "+2i" or "0+2i".
    """
    m = _COMPLEX_RE.match(text)
    if not m or (m.group(1) is None and m.group(2) is None):
        raise ConfigError(f"malformed complex number {text!r}")
    re_part = float(m.group(1).replace(" ", "")) if m.group(1) else 0.0
    im_part = 0.0
    if m.group(2):
        mag = float(m.group(3)) if m.group(3) else 1.0
        im_part = mag if m.group(2) == "+" else -mag
    return complex(re_part, im_part)


def _workers_default() -> int:
    raw = os.environ.get("QFSLICE_WORKERS", "1")
    try:
        return int(raw)
    except ValueError:
        return -1  # rejected during validation


def _add_common(p: argparse.ArgumentParser, window: bool = True) -> None:
    p.add_argument("--l", type=float, required=True, help="real length l > 0")
    if window:
        p.add_argument("--re-min", type=float, default=None)
        p.add_argument("--re-max", type=float, default=None)
        p.add_argument("--im-min", type=float, default=-math.pi)
        p.add_argument("--im-max", type=float, default=math.pi)
        p.add_argument("--nx", type=int, default=200)
        p.add_argument("--ny", type=int, default=100)
    d = BqParams()
    p.add_argument("--explore-cutoff", type=float, default=d.explore_cutoff)
    p.add_argument("--node-cap", type=int, default=d.node_cap)
    p.add_argument("--real-band-eps", type=float, default=d.real_band_eps)
    p.add_argument("--saturation", type=float, default=d.saturation)
    p.add_argument("--workers", type=int, default=None, help="threads (default $QFSLICE_WORKERS or 1)")
    p.add_argument("--json", dest="json_out", default=None, help="also write the report here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qfslice", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"qfslice {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="classify a window of the tau-strip")
    _add_common(p)
    p.add_argument("--out", default=None, help="PGM (or PPM with overlays)")
    p.add_argument("--csv", default=None, help="per-cell CSV re,im,verdict,label")
    p.add_argument("--figure", default=None, help="matplotlib PNG")
    p.add_argument("--overlay-pp", action="store_true", help="draw the +-pp_bound lines")
    p.add_argument("--unknown-bridges", action="store_true", help="let Unknown cells join QF components")

    p = sub.add_parser("components", help="count non-standard QF components")
    _add_common(p)
    p.add_argument("--out", default=None)
    p.add_argument("--figure", default=None)
    p.add_argument("--unknown-bridges", action="store_true")

    p = sub.add_parser("ray", help="rational pleating ray")
    _add_common(p)
    p.add_argument("--slope", required=True, help="p/q with q >= 1")
    p.add_argument("--csv", default=None, help="segment,side,re,im")
    p.add_argument("--out", default=None, help="overlay PPM")
    p.add_argument("--figure", default=None)

    p = sub.add_parser("verify", help="check the known-region predicates")
    _add_common(p, window=False)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("limitset", help="limit-set point cloud")
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--tau", required=True, help='complex "x+yi"')
    p.add_argument("--max-word-len", type=int, default=10)
    p.add_argument("--csv", default=None, help="re,im,wordlen")
    p.add_argument("--out", default=None, help="PGM")
    p.add_argument("--figure", default=None)
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--json", dest="json_out", default=None)
    return ap


def _params(a) -> BqParams:
    try:
        return BqParams(a.explore_cutoff, a.node_cap, a.real_band_eps, a.saturation)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _window(a) -> Window:
    re_min = a.re_min if a.re_min is not None else -a.l / 2
    re_max = a.re_max if a.re_max is not None else 1.5 * a.l
    try:
        return Window(re_min, re_max, a.im_min, a.im_max, a.nx, a.ny)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _resolve(a) -> dict:
    if not (a.l > 0 and math.isfinite(a.l)):
        raise ConfigError("--l must be a positive real")
    cfg = {k: v for k, v in vars(a).items() if k != "func"}
    if "workers" in cfg:
        if cfg["workers"] is None:
            cfg["workers"] = _workers_default()
        if cfg["workers"] < 1:
            raise ConfigError("worker count must be >= 1")
    if "re_min" in cfg:
        w = _window(a)
        cfg.update(re_min=w.re_min, re_max=w.re_max)
    return cfg


def _emit(report: dict, json_out) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if json_out:
        path = Path(json_out)
        try:
            path.write_text(text + "\n")
        except OSError as e:
            raise OSError(f"cannot write {path}: {e.strerror or e}") from e
    print(text)


def _report(cfg: dict, t0: float, **fields) -> dict:
    out = {"version": __version__, "config": cfg, "timing": {"wall_seconds": round(time.perf_counter() - t0, 6)}}
    out.update(fields)
    return out


def write_scan_csv(s, path) -> None:
    path = Path(path)
    w = s.window
    re_c, im_c = w.re_centers(), w.im_centers()
    labels = s.labels
    from .bq import Verdict

    try:
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["re", "im", "verdict", "label"])
            for i in range(w.ny):
                for j in range(w.nx):
                    wr.writerow([repr(float(re_c[j])), repr(float(im_c[i])), Verdict(int(s.cells[i, j])).label, int(labels[i, j])])
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def _write_raster(s, path, pp_overlay=False, rays=None) -> None:
    from .render import rasterize, write_pnm

    write_pnm(rasterize(s, pp_overlay=pp_overlay, rays=rays), path)


def cmd_scan(a) -> int:
    t0 = time.perf_counter()
    cfg = _resolve(a)
    s = scan(a.l, _window(a), _params(a), cfg["workers"], a.unknown_bridges)
    if a.out:
        _write_raster(s, a.out, pp_overlay=a.overlay_pp)
    if a.csv:
        write_scan_csv(s, a.csv)
    if a.figure:
        from .figures import slice_figure

        slice_figure(s, a.figure, pp_overlay=a.overlay_pp)
    _emit(_report(cfg, t0, histogram=s.histogram(), standard_id=s.standard_id), a.json_out)
    return EXIT_OK


def cmd_components(a) -> int:
    t0 = time.perf_counter()
    cfg = _resolve(a)
    w = _window(a)
    if w.re_min > -a.l / 4 or w.re_max < 5 * a.l / 4:
        raise ConfigError(f"window must cover [{-a.l / 4}, {5 * a.l / 4}] in Re tau")
    s = scan(a.l, w, _params(a), cfg["workers"], a.unknown_bridges)
    rep = count_components(s)
    if a.out:
        _write_raster(s, a.out)
    if a.figure:
        from .figures import slice_figure

        slice_figure(s, a.figure)
    _emit(_report(cfg, t0, histogram=s.histogram(), **rep.as_dict()), a.json_out)
    return EXIT_OK


def cmd_ray(a) -> int:
    t0 = time.perf_counter()
    cfg = _resolve(a)
    try:
        sl = parse_slope(a.slope)
    except (ValueError, OverflowError) as e:
        raise ConfigError(f"bad slope {a.slope!r}: {e}") from e
    if sl.q < 1:
        raise ConfigError("pleating rays need a slope other than 1/0")
    s = scan(a.l, _window(a), _params(a), cfg["workers"])
    segs = pleating_ray(a.l, sl, s.window, s.params, s)
    if a.csv:
        path = Path(a.csv)
        try:
            with path.open("w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow(["segment", "side", "re", "im"])
                for k, seg in enumerate(segs):
                    for t in seg.polyline:
                        wr.writerow([k, "+" if seg.side > 0 else "-", repr(t.real), repr(t.imag)])
        except OSError as e:
            raise OSError(f"cannot write {path}: {e.strerror or e}") from e
    if a.out:
        _write_raster(s, a.out, pp_overlay=True, rays=segs)
    if a.figure:
        from .figures import slice_figure

        slice_figure(s, a.figure, rays=segs)
    summary = [{"side": "+" if g.side > 0 else "-", "points": len(g.polyline)} for g in segs]
    _emit(_report(cfg, t0, histogram=s.histogram(), slope=str(sl), segments=summary), a.json_out)
    return EXIT_OK


def cmd_verify(a) -> int:
    t0 = time.perf_counter()
    cfg = _resolve(a)
    if a.samples < 1:
        raise ConfigError("--samples must be positive")
    r = verify(a.l, a.samples, _params(a), a.seed, cfg["workers"])
    _emit(_report(cfg, t0, **r), a.json_out)
    return EXIT_OK if r["passed"] else EXIT_VERIFY


def cmd_limitset(a) -> int:
    from .render import circle_fit_residual, limit_set, rasterize_points, realness, write_pnm, write_point_csv

    t0 = time.perf_counter()
    cfg = _resolve(a)
    tau = parse_complex(a.tau)
    cfg["tau"] = [tau.real, tau.imag]
    if not 0 <= a.max_word_len <= 20:
        raise ConfigError("--max-word-len must be in [0, 20]")
    if a.width < 1 or a.height < 1:
        raise ConfigError("--width and --height must be positive")
    pc = limit_set(FNPoint(a.l, tau), a.max_word_len)
    if a.csv:
        write_point_csv(pc, a.csv)
    if a.out:
        write_pnm(rasterize_points(pc, a.width, a.height), a.out)
    if a.figure:
        from .figures import limit_set_figure

        limit_set_figure(pc, a.figure, title=f"l = {a.l:g}, tau = {a.tau}")
    lens = np.bincount(pc.wordlen, minlength=a.max_word_len + 1).tolist()
    _emit(
        _report(
            cfg,
            t0,
            points=len(pc),
            points_by_wordlen=lens,
            realness=realness(pc.points),
            circle_fit_residual=circle_fit_residual(pc.points),
        ),
        a.json_out,
    )
    return EXIT_OK


COMMANDS = {
    "scan": cmd_scan,
    "components": cmd_components,
    "ray": cmd_ray,
    "verify": cmd_verify,
    "limitset": cmd_limitset,
}


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        return COMMANDS[a.command](a)
    except (ConfigError, WindowTooNarrow, DegenerateLength) as e:
        print(f"qfslice {a.command}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"qfslice {a.command}: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
