"""Minimal deterministic SVG charts (no plotting dependency)."""

from xml.sax.saxutils import escape

import numpy as np

WIDTH = 640
HEIGHT = 480
MARGIN = 56
PALETTE = ("#1f4e79", "#b03a2e", "#1e8449", "#7d3c98", "#ca6f1e", "#117a65", "#5d6d7e", "#a93226")


def _fmt(x):
    return f"{x:.6g}"


def _bounds(series, equal_aspect):
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        pad = max(abs(y0) * 0.05, 1e-12)
        y0, y1 = y0 - pad, y1 + pad
    if equal_aspect:
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        half = max(x1 - x0, (y1 - y0) * (WIDTH - 2 * MARGIN) / (HEIGHT - 2 * MARGIN)) / 2
        x0, x1 = cx - half, cx + half
        half_y = half * (HEIGHT - 2 * MARGIN) / (WIDTH - 2 * MARGIN)
        y0, y1 = cy - half_y, cy + half_y
    return x0, x1, y0, y1


def chart(series, title="", xlabel="", ylabel="", equal_aspect=False, closed=False):
    """Render ``[(label, x, y), ...]`` as polylines; returns the SVG text."""
    if not series:
        raise ValueError("nothing to plot")
    x0, x1, y0, y1 = _bounds(series, equal_aspect)
    sx = (WIDTH - 2 * MARGIN) / (x1 - x0)
    sy = (HEIGHT - 2 * MARGIN) / (y1 - y0)

    def px(x):
        return MARGIN + (np.asarray(x, dtype=float) - x0) * sx

    def py(y):
        return HEIGHT - MARGIN - (np.asarray(y, dtype=float) - y0) * sy

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" height="{HEIGHT - 2 * MARGIN}" '
        'fill="none" stroke="#888" stroke-width="1"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="15">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>'
        )
    for v, anchor in ((x0, "start"), (x1, "end")):
        out.append(
            f'<text x="{_fmt(float(px(v)))}" y="{HEIGHT - MARGIN + 16}" text-anchor="{anchor}" font-size="10">{_fmt(v)}</text>'
        )
    for v in (y0, y1):
        out.append(f'<text x="{MARGIN - 4}" y="{_fmt(float(py(v)))}" text-anchor="end" font-size="10">{_fmt(v)}</text>')
    for i, (label, x, y) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px(x), py(y)))
        tag = "polygon" if closed else "polyline"
        out.append(f'<{tag} points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"/>')
        if label:
            ly = MARGIN + 14 + 14 * i
            out.append(
                f'<text x="{WIDTH - MARGIN - 6}" y="{ly}" text-anchor="end" font-size="11" fill="{color}">{escape(label)}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
