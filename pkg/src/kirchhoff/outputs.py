"""File output: CSV with round-trip floats, atomic writes, tiny SVG line charts.

Every CSV starts with one ``# key: value`` metadata line per entry (the
config hash among them); :func:`read_csv` skips those lines.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def fmt(x) -> str:
    """17 significant digits in scientific notation; exact round trip for doubles."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, data: dict) -> Path:
    return atomic_write(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def csv_text(header, rows, meta: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def write_csv(path, header, rows, meta: dict | None = None) -> Path:
    return atomic_write(path, csv_text(header, rows, meta))


def read_csv(path):
    """Return ``(meta, header, float array)``."""
    meta, lines = {}, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].partition(":")
                meta[k.strip()] = v.strip()
            else:
                lines.append(line)
    rows = list(csv.reader(lines))
    data = np.array([[float(x) for x in r] for r in rows[1:]]) if len(rows) > 1 else np.zeros((0, len(rows[0])))
    return meta, rows[0], data


def modal_header(prefix: str, n: int):
    return [f"{prefix}_{k}" for k in range(1, n + 1)]


def ledger_rows(ledger):
    a = ledger.arrays()
    keys = ("t", "E", "gradnorm2", "kinetic2", "D", "residual")
    return list(keys), zip(*(a[k] for k in keys))


def trajectory_rows(basis, traj):
    header = ["t", *modal_header("u", basis.n), *modal_header("v", basis.n), "gradnorm2", "kinetic2"]
    rows = []
    for t, u, v in zip(traj.t, traj.u, traj.v):
        rows.append([float(t), *map(float, u), *map(float, v), basis.grad_sq(u), basis.l2_sq(v)])
    return header, rows


def svg_line_chart(series: dict, title: str = "", logy: bool = False, width: int = 640, height: int = 400,
                   meta: dict | None = None) -> str:
    """Polyline chart of ``{label: (x, y)}``; nonpositive values are dropped when ``logy``.

    ``meta`` entries are written as ``key: value`` lines in a ``<metadata>`` element.
    """
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    pad = 50
    curves = []
    for label, (x, y) in series.items():
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        keep = np.isfinite(y) & ((y > 0) if logy else True)
        x, y = x[keep], y[keep]
        if logy:
            y = np.log10(y)
        curves.append((label, x, y))
    xs = np.concatenate([c[1] for c in curves]) if curves else np.zeros(0)
    ys = np.concatenate([c[2] for c in curves]) if curves else np.zeros(0)
    if xs.size == 0:
        xs, ys = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    sx = lambda v: pad + (v - x0) / (x1 - x0) * (width - 2 * pad)
    sy = lambda v: height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{pad / 2:.1f}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{pad}" y="{height - pad / 3:.1f}" font-size="11">{x0:.4g}</text>',
        f'<text x="{width - pad}" y="{height - pad / 3:.1f}" text-anchor="end" font-size="11">{x1:.4g}</text>',
        f'<text x="4" y="{height - pad:.1f}" font-size="11">{("1e" if logy else "")}{y0:.4g}</text>',
        f'<text x="4" y="{pad + 4:.1f}" font-size="11">{("1e" if logy else "")}{y1:.4g}</text>',
    ]
    if meta:
        out.insert(1, "<metadata>" + escape("\n".join(f"{k}: {v}" for k, v in meta.items())) + "</metadata>")
    for i, (label, x, y) in enumerate(curves):
        color = colors[i % len(colors)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{width - pad - 4}" y="{pad + 16 * (i + 1)}" text-anchor="end" font-size="12" '
                   f'fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
