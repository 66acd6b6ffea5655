"""Artifact writers: CSV tables, JSON summaries and minimal SVG line plots.

Every file is written to a temporary sibling and moved into place, so readers
never see a partial artifact. Floats are formatted with ``repr``-exact
``.17g`` so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from xml.sax.saxutils import escape


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if hasattr(v, "dtype"):
        return _cell(v.item())
    return str(v)


def write_csv(path, columns, rows) -> Path:
    """``rows`` are mappings keyed by ``columns`` (header written in that order)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row[c]) for c in columns])
    return atomic_write(path, buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (list, dict)):
        obj = obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_json(path, payload) -> Path:
    return atomic_write(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_line_plot(path, series, *, title="", xlabel="", ylabel="", logx=False, logy=False,
                  width=640, height=420) -> Path:
    """Write a line plot; ``series`` is a list of ``(label, xs, ys)``."""
    tx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    ty = (lambda v: math.log10(v)) if logy else (lambda v: v)
    pts = [[(tx(x), ty(y)) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)
            and (not logx or x > 0) and (not logy or y > 0)] for _, xs, ys in series]
    flat = [p for s in pts for p in s] or [(0.0, 0.0)]
    x0, x1 = min(p[0] for p in flat), max(p[0] for p in flat)
    y0, y1 = min(p[1] for p in flat), max(p[1] for p in flat)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    ml, mr, mt, mb = 70, 20, 40, 50
    sx = lambda v: ml + (v - x0) / (x1 - x0) * (width - ml - mr)  # noqa: E731
    sy = lambda v: height - mb - (v - y0) / (y1 - y0) * (height - mt - mb)  # noqa: E731

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" stroke="black"/>',
           f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>']
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        lx = f"1e{fx:.2g}" if logx else f"{fx:.3g}"
        ly = f"1e{fy:.2g}" if logy else f"{fy:.3g}"
        out.append(f'<text x="{sx(fx):.1f}" y="{height - mb + 16}" text-anchor="middle">{lx}</text>')
        out.append(f'<text x="{ml - 6}" y="{sy(fy) + 4:.1f}" text-anchor="end">{ly}</text>')
    out.append(f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{height / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {height / 2:.1f})">{escape(ylabel)}</text>')
    for i, ((label, _, _), s) in enumerate(zip(series, pts)):
        color = _PALETTE[i % len(_PALETTE)]
        if s:
            path_d = " ".join(f"{'M' if j == 0 else 'L'}{sx(x):.2f},{sy(y):.2f}" for j, (x, y) in enumerate(s))
            out.append(f'<path d="{path_d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            out += [f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="{color}"/>' for x, y in s]
        ly = mt + 14 * i + 6
        out.append(f'<rect x="{width - mr - 150}" y="{ly - 8}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{width - mr - 135}" y="{ly + 1}">{escape(str(label))}</text>')
    out.append("</svg>\n")
    return atomic_write(path, "\n".join(out))
