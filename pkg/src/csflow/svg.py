"""Deterministic standalone SVG emission for curve snapshots and runs.

3-d (and higher) curves are rendered as side-by-side xy and xz projection
panels; identical input produces byte-identical output.
"""

import numpy as np

PANEL = 240.0
PAD = 16.0


def _fmt(v):
    return "%.6f" % v


def _path(points, sx, sy, color, width=1.2):
    d = "M " + " L ".join(
        "%s %s" % (_fmt(sx(p[0])), _fmt(sy(p[1]))) for p in points
    ) + " Z"
    return '<path d="%s" fill="none" stroke="%s" stroke-width="%s"/>' % (d, color, width)


def _panel(planar_list, colors, x0, y0):
    """One square panel at (x0, y0); planar_list is a list of (N,2) arrays."""
    allpts = np.vstack(planar_list)
    lo = allpts.min(axis=0)
    hi = allpts.max(axis=0)
    span = max(float(np.max(hi - lo)), 1e-12)
    cx, cy = (lo + hi) / 2.0
    scale = (PANEL - 2 * PAD) / span

    def sx(x):
        return x0 + PANEL / 2.0 + (x - cx) * scale

    def sy(y):
        return y0 + PANEL / 2.0 - (y - cy) * scale

    parts = [
        '<rect x="%s" y="%s" width="%s" height="%s" fill="none" stroke="#999" stroke-width="0.5"/>'
        % (_fmt(x0), _fmt(y0), _fmt(PANEL), _fmt(PANEL))
    ]
    for pts, color in zip(planar_list, colors):
        parts.append(_path(pts, sx, sy, color))
    return parts


def _colors(k):
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]
    return [palette[i % len(palette)] for i in range(k)]


def _row(arrays, colors, y0):
    parts = _panel([a[:, :2] for a in arrays], colors, 0.0, y0)
    deep = [(a, c) for a, c in zip(arrays, colors) if a.shape[1] > 2]
    if deep:
        parts += _panel([a[:, [0, 2]] for a, _ in deep],
                        [c for _, c in deep], PANEL + PAD, y0)
        return parts, 2 * PANEL + PAD
    return parts, PANEL


def _document(parts, width, height):
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" width="%s" height="%s" '
        'viewBox="0 0 %s %s">\n%s\n</svg>\n'
        % (_fmt(width), _fmt(height), _fmt(width), _fmt(height), "\n".join(parts))
    )


def curve_svg(curves):
    """SVG document for a list of curves (ClosedCurve or (N,dim) arrays).

    The first curve is drawn blue, the second (conventionally the
    projection) red.  Planar curves get one panel; higher-dimensional
    curves get xy and xz panels side by side.  An empty list yields an
    empty document.
    """
    arrays = [np.asarray(getattr(c, "samples", c), dtype=float) for c in curves]
    if not arrays:
        return _document(["<!-- empty frame list -->"], 1, 1)
    parts, width = _row(arrays, _colors(len(arrays)), 0.0)
    return _document(parts, width, PANEL)


def series_svg(frames, max_rows=4):
    """Snapshot grid of a frame series: one xy (+xz) row per selected frame."""
    if not frames:
        return curve_svg([])
    if len(frames) > max_rows:
        sel = np.linspace(0, len(frames) - 1, max_rows).round().astype(int)
        frames = [frames[i] for i in sel]
    parts = []
    width = PANEL
    for i, f in enumerate(frames):
        arr = np.asarray(f.curve.samples, dtype=float)
        row_parts, width = _row([arr], _colors(1), i * (PANEL + PAD))
        parts += row_parts
    height = len(frames) * (PANEL + PAD) - PAD
    return _document(parts, width, height)
