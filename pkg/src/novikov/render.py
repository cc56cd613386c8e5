"""Plain SVG drawings of traced level lines, byte-stable for identical input."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

COLORS = {"electronic": "#1f77b4", "hole": "#d62728", "spanning": "#2ca02c", "boundary-truncated": "#7f7f7f"}
SIZE = 600
MARGIN = 30


def _fmt(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(components, window, style: dict | None = None, level: float | None = None) -> str:
    """One path per component in list order, colored by kind; spanning lines get their own color."""
    style = dict(style or {})
    colors = {**COLORS, **style.get("colors", {})}
    width = float(style.get("stroke_width", 1.0))
    x0, y0, x1, y1 = window.extent
    scale = SIZE / max(x1 - x0, y1 - y0)
    total = SIZE + 2 * MARGIN

    def px(p):
        return MARGIN + (p[:, 0] - x0) * scale, MARGIN + (y1 - p[:, 1]) * scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total + 30}" '
        f'viewBox="0 0 {total} {total + 30}">',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="#000" stroke-width="1"/>',
    ]
    for i, comp in enumerate(components):
        key = "spanning" if comp.spans_window else comp.kind
        xs, ys = px(np.asarray(comp.polyline, dtype=float))
        coords = [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(xs, ys)]
        d = "M" + coords[0] + "".join(" L" + c for c in coords[1:]) + (" Z" if comp.closed else "")
        out.append(f'<path id="c{i}" d="{d}" fill="none" stroke="{colors.get(key, "#000")}" '
                   f'stroke-width="{_fmt(width)}"/>')
    x = MARGIN
    for k in ("electronic", "hole", "spanning", "boundary-truncated"):
        out.append(f'<text x="{x}" y="{MARGIN - 10}" font-family="monospace" font-size="11" fill="{colors[k]}">'
                   f"{k}</text>")
        x += 7 * len(k) + 16
    caption = f"level c = {level:.6g}" if level is not None else "level lines"
    caption += f", window [{x0:.4g}, {x1:.4g}] x [{y0:.4g}, {y1:.4g}]"
    out.append(f'<text x="{MARGIN}" y="{total + 15}" font-family="monospace" font-size="12">{escape(caption)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
