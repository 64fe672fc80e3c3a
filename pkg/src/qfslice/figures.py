"""Matplotlib figures for slices and limit sets, written to PNG files."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402
from matplotlib.patches import Patch  # noqa: E402

from .render import COLOR_PALETTE, PointCloud, default_bounds  # noqa: E402
from .slicescan import RaySegment, SliceScan, pp_bound  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.linewidth": 0.6,
    "axes.titlesize": 10,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _cmap():
    return ListedColormap([tuple(c / 255 for c in COLOR_PALETTE[k]) for k in range(3)])


def _save(fig, path) -> None:
    path = Path(path)
    try:
        # fixed metadata keeps reruns byte-stable
        fig.savefig(path, format="png", metadata={"Software": None})
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e
    finally:
        plt.close(fig)


def slice_figure(s: SliceScan, path, rays: list[RaySegment] | None = None, pp_overlay: bool = True) -> None:
    w = s.window
    with plt.rc_context(STYLE):
        aspect = (w.im_max - w.im_min) / (w.re_max - w.re_min)
        fig, ax = plt.subplots(figsize=(7.0, max(2.0, 7.0 * aspect)))
        ax.imshow(
            s.cells,
            origin="lower",
            extent=(w.re_min, w.re_max, w.im_min, w.im_max),
            cmap=_cmap(),
            vmin=-0.5,
            vmax=2.5,
            interpolation="nearest",
            aspect="auto",
        )
        if pp_overlay:
            b = pp_bound(s.l)
            for im in (b, -b):
                ax.axhline(im, color="#dc2828", lw=0.7, ls="--")
        for seg in rays or []:
            ax.plot([t.real for t in seg.polyline], [t.imag for t in seg.polyline], color="#fa0", lw=1.2)
        ax.set_xlabel(r"Re $\tau$")
        ax.set_ylabel(r"Im $\tau$")
        ax.set_title(f"l = {s.l:g}")
        ax.set_yticks([-math.pi, 0, math.pi], [r"$-\pi$", "0", r"$\pi$"])
        handles = [Patch(color=_cmap()(k), label=lab) for k, lab in ((1, "QF"), (0, "NotQF"), (2, "Unknown"))]
        ax.legend(handles=handles, loc="upper right", fontsize=7, framealpha=0.9)
        _save(fig, path)


def limit_set_figure(pc: PointCloud, path, title: str = "", bounds=None) -> None:
    pts = pc.finite()
    re0, re1, im0, im1 = bounds if bounds is not None else default_bounds(pc)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 5.0))
        ax.scatter(pts.points.real, pts.points.imag, s=0.2, c=pts.wordlen, cmap="viridis", linewidths=0)
        ax.set_xlim(re0, re1)
        ax.set_ylim(im0, im1)
        ax.set_aspect("equal")
        ax.set_title(title)
        _save(fig, path)
