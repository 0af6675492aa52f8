"""File emitters for similarity matrices, sweep curves and dendrograms.

All output is byte-deterministic for identical inputs: fixed float formats,
fixed element order, no timestamps. The SVG heatmap is written by hand for
that reason.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .analysis import Dendrogram, PairwiseMatrix
from .retrieval import KSweepCurve

# three-stop linear color ramp (low, mid, high)
_STOPS = ((0x44, 0x01, 0x54), (0x21, 0x91, 0x8C), (0xFD, 0xE7, 0x25))

_CELL = 28
_LABEL_SPACE = 170
_LEGEND_W = 16
_LEGEND_GAP = 30
_LEGEND_STEPS = 32
_TEXT_LIMIT = 25  # draw in-cell values only up to this many models


def _context_line(m: PairwiseMatrix) -> str:
    ctx = m.context
    k = ctx.get("k")
    nq = ctx.get("num_queries")
    return (
        f"# measure={m.measure} dataset={ctx.get('dataset_id', 'unknown')} "
        f"k={'none' if k is None else k} "
        f"num_queries={'none' if nq is None else nq}"
    )


def emit_csv(m: PairwiseMatrix, path: str | Path) -> None:
    """Upper triangle (incl. diagonal) as model_a,model_b,value rows."""
    m.validate()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_context_line(m) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model_a", "model_b", "value"])
        for i, a in enumerate(m.labels):
            for j in range(i, len(m.labels)):
                writer.writerow([a, m.labels[j], f"{m.values[i, j]:.9f}"])


def emit_sweep_csv(curves: list[KSweepCurve], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["query_id", "k", "jaccard", "rank_sim"])
        for curve in curves:
            for k, jac, rnk in curve.points():
                writer.writerow([curve.query_id, k, f"{jac:.9f}", f"{rnk:.9f}"])


def emit_dendrogram_json(dend: Dendrogram, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "labels": dend.labels,
        "merges": [
            {"cluster_a": a, "cluster_b": b, "height": h, "size": s}
            for a, b, h, s in dend.merges
        ],
        "leaf_order": dend.leaf_order,
    }
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def color_ramp(v: float) -> str:
    """Linear interpolation through the three ramp stops; v clamped to [0, 1]."""
    v = min(max(v, 0.0), 1.0)
    if v <= 0.5:
        lo, hi, t = _STOPS[0], _STOPS[1], v / 0.5
    else:
        lo, hi, t = _STOPS[1], _STOPS[2], (v - 0.5) / 0.5
    rgb = tuple(round(a + (b - a) * t) for a, b in zip(lo, hi))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _text_color(fill: str) -> str:
    r, g, b = int(fill[1:3], 16), int(fill[3:5], 16), int(fill[5:7], 16)
    luma = 0.299 * r + 0.587 * g + 0.114 * b
    return "#000000" if luma > 127 else "#ffffff"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_heatmap_svg(
    m: PairwiseMatrix, dend: Dendrogram | None, path: str | Path
) -> None:
    """m x m colored grid, optionally reordered by a dendrogram's leaf order."""
    m.validate()
    labels = list(m.labels)
    if dend is not None:
        if sorted(dend.leaf_order) != sorted(labels):
            raise ValueError("dendrogram labels do not match the matrix")
        labels = list(dend.leaf_order)
    pos = {label: i for i, label in enumerate(m.labels)}
    n = len(labels)
    grid = _LABEL_SPACE
    width = grid + n * _CELL + _LEGEND_GAP + _LEGEND_W + 46
    height = grid + n * _CELL + 16

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    )
    out.append(
        '<style>text{font-family:sans-serif;fill:#000000}'
        ".lab{font-size:11px}.val{font-size:9px}.tick{font-size:10px}</style>"
    )
    out.append(f'<rect width="{width}" height="{height}" fill="#ffffff"/>')
    out.append(f"<!-- {_esc(_context_line(m)[2:])} -->")

    for i, row_label in enumerate(labels):
        y = grid + i * _CELL
        out.append(
            f'<text class="lab" x="{grid - 6}" y="{y + _CELL / 2 + 4:.0f}" '
            f'text-anchor="end">{_esc(row_label)}</text>'
        )
        for j, col_label in enumerate(labels):
            x = grid + j * _CELL
            v = float(m.values[pos[row_label], pos[col_label]])
            fill = color_ramp(v)
            out.append(
                f'<rect x="{x}" y="{y}" width="{_CELL}" height="{_CELL}" '
                f'fill="{fill}"/>'
            )
            if n <= _TEXT_LIMIT:
                out.append(
                    f'<text class="val" x="{x + _CELL / 2:.0f}" '
                    f'y="{y + _CELL / 2 + 3:.0f}" text-anchor="middle" '
                    f'fill="{_text_color(fill)}">{v:.2f}</text>'
                )
    for j, col_label in enumerate(labels):
        x = grid + j * _CELL
        out.append(
            f'<text class="lab" transform="rotate(-90 {x + _CELL / 2:.0f} '
            f'{grid - 6})" x="{x + _CELL / 2:.0f}" y="{grid - 6}" '
            f'text-anchor="start">{_esc(col_label)}</text>'
        )

    # legend: discrete ramp plus end/mid ticks
    lx = grid + n * _CELL + _LEGEND_GAP
    lh = n * _CELL
    step_h = lh / _LEGEND_STEPS
    for s in range(_LEGEND_STEPS):
        v = 1.0 - (s + 0.5) / _LEGEND_STEPS
        y = grid + s * step_h
        out.append(
            f'<rect x="{lx}" y="{y:.2f}" width="{_LEGEND_W}" '
            f'height="{step_h + 0.5:.2f}" fill="{color_ramp(v)}"/>'
        )
    for frac, tick in ((0.0, "1.0"), (0.5, "0.5"), (1.0, "0.0")):
        y = grid + frac * lh
        out.append(
            f'<text class="tick" x="{lx + _LEGEND_W + 4}" y="{y + 4:.0f}">{tick}</text>'
        )
    out.append("</svg>")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
