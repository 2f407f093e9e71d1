"""Dependency-free SVG heatmaps with a blue-white-red diverging colormap."""

import numpy as np

BLUE = (0x3B, 0x4C, 0xC0)
WHITE = (0xF7, 0xF7, 0xF7)
RED = (0xB4, 0x04, 0x26)

CELL = 40
LABEL_SPACE = 110
FONT = "font-family=\"monospace\" font-size=\"11\""


def value_to_color(value: float, vmin: float, vmax: float) -> str:
    """Piecewise-linear blue -> white -> red over [vmin, vmax], clamped."""
    if vmin >= vmax:
        raise ValueError(f"vmin must be < vmax, got {vmin} >= {vmax}")
    t = (value - vmin) / (vmax - vmin)
    t = min(max(t, 0.0), 1.0)
    if t <= 0.5:
        lo, hi, u = BLUE, WHITE, t / 0.5
    else:
        lo, hi, u = WHITE, RED, (t - 0.5) / 0.5
    channels = [int(round(a + (b - a) * u)) for a, b in zip(lo, hi)]
    return "#{:02X}{:02X}{:02X}".format(*channels)


def render_heatmap(values: np.ndarray, row_labels, col_labels,
                   vmin: float, vmax: float, title: str = "") -> str:
    """Grid-of-rectangles SVG; one rect per cell, labels along both axes."""
    values = np.asarray(values, dtype=np.float64)
    n, m = values.shape
    if len(row_labels) != n or len(col_labels) != m:
        raise ValueError("label counts must match the value grid")
    width = LABEL_SPACE + m * CELL + 10
    height = LABEL_SPACE + n * CELL + 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#FFFFFF"/>',
    ]
    if title:
        parts.append(f'<text x="{LABEL_SPACE}" y="16" font-family="monospace" '
                     f'font-size="13">{_escape(title)}</text>')
    for i in range(n):
        for j in range(m):
            color = value_to_color(float(values[i, j]), vmin, vmax)
            x = LABEL_SPACE + j * CELL
            y = LABEL_SPACE + i * CELL
            parts.append(f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
                         f'fill="{color}" stroke="#FFFFFF" stroke-width="1"/>')
    for i, label in enumerate(row_labels):
        y = LABEL_SPACE + i * CELL + CELL // 2 + 4
        parts.append(f'<text x="{LABEL_SPACE - 6}" y="{y}" {FONT} '
                     f'text-anchor="end">{_escape(str(label))}</text>')
    for j, label in enumerate(col_labels):
        x = LABEL_SPACE + j * CELL + CELL // 2
        y = LABEL_SPACE - 6
        parts.append(f'<text x="{x}" y="{y}" {FONT} text-anchor="start" '
                     f'transform="rotate(-60 {x} {y})">{_escape(str(label))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def write_heatmap(values, row_labels, col_labels, vmin, vmax, path,
                  title: str = "") -> None:
    svg = render_heatmap(values, row_labels, col_labels, vmin, vmax, title)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
