"""Deterministic standalone SVG plots.

Coordinates are printed with a fixed number of decimals and no timestamps
or random ids are emitted, so equal inputs give byte-identical files.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

SIZE = 600
PAD = 30
PALETTE = ("#1f4e9c", "#c0392b", "#27ae60", "#8e44ad")


def _header(width: float, height: float, title: str) -> list:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">',
        f"<title>{_escape(title)}</title>",
        f'<rect x="0" y="0" width="{width:.0f}" height="{height:.0f}" fill="white"/>',
    ]


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _equal_aspect(xs, ys):
    """Affine map into the canvas with one scale for both axes."""
    x_all = np.concatenate([np.asarray(x, float) for x in xs])
    y_all = np.concatenate([np.asarray(y, float) for y in ys])
    ok = np.isfinite(x_all) & np.isfinite(y_all)
    if not np.any(ok):
        raise InvalidInputError("nothing finite to plot")
    x0, x1 = x_all[ok].min(), x_all[ok].max()
    y0, y1 = y_all[ok].min(), y_all[ok].max()
    span = max(x1 - x0, y1 - y0, 1e-12)
    scale = (SIZE - 2 * PAD) / span
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)

    def to_canvas(x, y):
        return SIZE / 2 + scale * (np.asarray(x) - cx), SIZE / 2 - scale * (np.asarray(y) - cy)

    return to_canvas


def _polyline(px, py, color: str) -> list:
    out = []
    ok = np.isfinite(px) & np.isfinite(py)
    # NaN gaps split the polyline
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        return out
    breaks = np.flatnonzero(np.diff(idx) > 1)
    for seg in np.split(idx, breaks + 1):
        pts = " ".join(f"{px[i]:.3f},{py[i]:.3f}" for i in seg)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
    return out


def curves_svg(series, title: str = "curve") -> str:
    """Planar curves ``[(x, y), ...]`` drawn with a 1:1 aspect ratio."""
    if not series:
        raise InvalidInputError("no curves to plot")
    to_canvas = _equal_aspect([s[0] for s in series], [s[1] for s in series])
    lines = _header(SIZE, SIZE, title)
    ox, oy = to_canvas(0.0, 0.0)
    if PAD <= ox <= SIZE - PAD and PAD <= oy <= SIZE - PAD:
        lines.append(f'<circle cx="{float(ox):.3f}" cy="{float(oy):.3f}" r="2.5" fill="#555555"/>')
    for k, (x, y) in enumerate(series):
        px, py = to_canvas(x, y)
        lines += _polyline(np.asarray(px, float), np.asarray(py, float), PALETTE[k % len(PALETTE)])
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _color(v: float) -> str:
    """Sequential white to dark-blue ramp on ``v`` in [0, 1]."""
    v = min(max(v, 0.0), 1.0)
    r = int(round(255 - v * (255 - 31)))
    g = int(round(255 - v * (255 - 78)))
    b = int(round(255 - v * (255 - 156)))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(x, y, values, title: str = "residual") -> str:
    """Scattered nodes ``(x, y)`` coloured by ``log10 |values|``.

    Nodes are drawn as cells of the underlying tensor grid; repeated
    ``(x, y)`` pairs (higher-dimensional grids) keep their maximum.
    """
    x, y, values = (np.asarray(a, float).ravel() for a in (x, y, values))
    if not (x.size == y.size == values.size) or x.size == 0:
        raise InvalidInputError("heatmap needs equal-length non-empty columns")
    ux, iy = np.unique(x), np.unique(y)
    cells = np.full((ux.size, iy.size), np.nan)
    ix = np.searchsorted(ux, x)
    jy = np.searchsorted(iy, y)
    mag = np.abs(values)
    for a, b, v in zip(ix, jy, mag):
        if not np.isfinite(cells[a, b]) or v > cells[a, b]:
            cells[a, b] = v
    logs = np.log10(np.where(cells > 0, cells, np.nan))
    finite = logs[np.isfinite(logs)]
    lo, hi = (finite.min(), finite.max()) if finite.size else (0.0, 1.0)
    span = max(hi - lo, 1e-12)
    w = (SIZE - 2 * PAD) / ux.size
    h = (SIZE - 2 * PAD) / iy.size
    lines = _header(SIZE, SIZE + 20, title)
    for a in range(ux.size):
        for b in range(iy.size):
            v = logs[a, b]
            fill = "#dddddd" if not np.isfinite(v) else _color((v - lo) / span)
            lines.append(f'<rect x="{PAD + a * w:.3f}" y="{SIZE - PAD - (b + 1) * h:.3f}" '
                         f'width="{w:.3f}" height="{h:.3f}" fill="{fill}"/>')
    lines.append(f'<text x="{PAD}" y="{SIZE + 5}" font-size="12" font-family="monospace">'
                 f"log10 |residual| from {lo:.2f} to {hi:.2f}</text>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
